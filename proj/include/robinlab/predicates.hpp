#pragma once

#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "robinlab/geometry.hpp"

namespace robinlab::predicates {

namespace detail {

using exact = boost::multiprecision::cpp_rational;

inline int sign_of(const exact& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

inline int orient2d_exact(Point a, Point b, Point c) {
  const exact acx = exact(a.x) - exact(c.x), bcx = exact(b.x) - exact(c.x);
  const exact acy = exact(a.y) - exact(c.y), bcy = exact(b.y) - exact(c.y);
  return sign_of(acx * bcy - acy * bcx);
}

inline int incircle_exact(Point a, Point b, Point c, Point d) {
  const exact adx = exact(a.x) - exact(d.x), ady = exact(a.y) - exact(d.y);
  const exact bdx = exact(b.x) - exact(d.x), bdy = exact(b.y) - exact(d.y);
  const exact cdx = exact(c.x) - exact(d.x), cdy = exact(c.y) - exact(d.y);
  const exact alift = adx * adx + ady * ady;
  const exact blift = bdx * bdx + bdy * bdy;
  const exact clift = cdx * cdx + cdy * cdy;
  return sign_of(alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) + clift * (adx * bdy - ady * bdx));
}

}  // namespace detail

/// Sign of the signed area of (a, b, c): +1 counterclockwise, -1 clockwise, 0 collinear.
inline int orient2d(Point a, Point b, Point c) {
  const double detleft = (a.x - c.x) * (b.y - c.y);
  const double detright = (a.y - c.y) * (b.x - c.x);
  const double det = detleft - detright;
  const double bound = 3.3306690738754716e-16 * (std::abs(detleft) + std::abs(detright));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return detail::orient2d_exact(a, b, c);
}

/// +1 if d lies strictly inside the circumcircle of the counterclockwise triangle (a, b, c).
inline int incircle(Point a, Point b, Point c, Point d) {
  const double adx = a.x - d.x, bdx = b.x - d.x, cdx = c.x - d.x;
  const double ady = a.y - d.y, bdy = b.y - d.y, cdy = c.y - d.y;
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = 1.1102230246251577e-15 * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return detail::incircle_exact(a, b, c, d);
}

}  // namespace robinlab::predicates
