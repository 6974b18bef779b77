#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "robinlab/error.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/predicates.hpp"

// Incremental Delaunay triangulation with conforming segment recovery and
// circumcenter refinement. Internal to the mesh module.
namespace robinlab::detail {

enum class SegmentKind : std::uint8_t { Outer, Hole };

struct SegmentCurve {
  bool circular = false;
  Point center{};
  double radius = 0.0;
};

struct Segment {
  int a = -1;
  int b = -1;
  SegmentKind kind = SegmentKind::Outer;
  int curve = -1;  // index into the curve table, -1 for straight
  bool alive = true;
};

struct DTri {
  std::array<int, 3> v{};
  std::array<int, 3> n{-1, -1, -1};  // n[i] is across the edge opposite v[i]
  int region = 0;                    // 0 exterior, 1 punctured domain, 2 hole
  bool alive = true;
};

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

inline Point circumcenter(Point a, Point b, Point c) {
  const Point ab = b - a, ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = dot(ab, ab), ac2 = dot(ac, ac);
  return a + Point{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
}

class Refiner {
 public:
  using SizeField = std::function<double(Point)>;

  Refiner(Point lo, Point hi) {
    const Point c = 0.5 * (lo + hi);
    const double r = 20.0 * std::max({hi.x - lo.x, hi.y - lo.y, 1e-3});
    add_vertex(c + Point{-r, -r});
    add_vertex(c + Point{r, -r});
    add_vertex(c + Point{0.0, r});
    tris_.push_back({{0, 1, 2}, {-1, -1, -1}, 0, true});
    vert_tri_ = {0, 0, 0};
    cavity_mark_.assign(1, 0);
  }

  const std::vector<Point>& points() const { return pts_; }
  const std::vector<DTri>& triangles() const { return tris_; }
  const std::vector<Segment>& segments() const { return segs_; }
  static constexpr int kSuperVertices = 3;

  int add_curve(SegmentCurve c) {
    curves_.push_back(c);
    return static_cast<int>(curves_.size()) - 1;
  }

  /// Inserts a point; returns its index (an existing index if the point is a duplicate).
  int insert_point(Point p) {
    const int start = last_tri_;
    const int t = locate(p, start);
    if (t < 0) fail(ErrorCode::MeshFailure, "point outside the bounding triangle");
    for (int k = 0; k < 3; ++k)
      if (pts_[tris_[t].v[k]] == p) return tris_[t].v[k];
    return insert_in(p, t);
  }

  void add_segment(int a, int b, SegmentKind kind, int curve) {
    segs_.push_back({a, b, kind, curve, true});
    seg_index_[edge_key(a, b)] = static_cast<int>(segs_.size()) - 1;
  }

  /// Splits encroached or missing segments until every segment is a Delaunay edge.
  void recover_segments(std::size_t cap) {
    for (std::size_t s = 0; s < segs_.size(); ++s) seg_queue_.push_back(static_cast<int>(s));
    drain_segments(cap);
  }

  /// Flood-fills regions: crossing an outer segment toggles 0/1, a hole segment toggles 1/2.
  void classify_regions() {
    for (auto& t : tris_) t.region = -1;
    std::deque<int> q;
    for (std::size_t i = 0; i < tris_.size(); ++i) {
      if (!tris_[i].alive) continue;
      for (int k = 0; k < 3; ++k)
        if (tris_[i].v[k] < kSuperVertices) {
          tris_[i].region = 0;
          q.push_back(static_cast<int>(i));
          break;
        }
    }
    while (!q.empty()) {
      const int t = q.front();
      q.pop_front();
      for (int k = 0; k < 3; ++k) {
        const int nb = tris_[t].n[k];
        if (nb < 0 || tris_[nb].region >= 0) continue;
        const int a = tris_[t].v[(k + 1) % 3], b = tris_[t].v[(k + 2) % 3];
        int r = tris_[t].region;
        if (auto it = seg_index_.find(edge_key(a, b)); it != seg_index_.end() && segs_[it->second].alive) {
          if (segs_[it->second].kind == SegmentKind::Outer) r = (r == 0) ? 1 : 0;
          else r = (r == 1) ? 2 : 1;
        }
        tris_[nb].region = r;
        q.push_back(nb);
      }
    }
    for (auto& t : tris_)
      if (t.alive && t.region < 0) t.region = 0;
  }

  /// Circumcenter refinement with a radius-edge bound and a size field.
  void refine(double ratio_bound, const SizeField& h, std::size_t cap) {
    ratio_bound_ = ratio_bound;
    size_ = h;
    for (std::size_t i = 0; i < tris_.size(); ++i)
      if (tris_[i].alive && tris_[i].region != 0) tri_queue_.push_back({static_cast<int>(i), tris_[i].v});
    while (!tri_queue_.empty() || !seg_queue_.empty()) {
      if (!seg_queue_.empty()) {
        drain_segments(cap);
        continue;
      }
      const auto [t, verts] = tri_queue_.front();
      tri_queue_.pop_front();
      if (!tris_[t].alive || tris_[t].v != verts || tris_[t].region == 0 || !is_bad(t)) continue;
      split_triangle(t);
      if (pts_.size() > cap) fail(ErrorCode::MeshFailure, "vertex budget exceeded during refinement");
    }
  }

  bool has_edge(int a, int b) const { return find_edge(a, b).first >= 0; }

 private:
  std::vector<Point> pts_;
  std::vector<DTri> tris_;
  std::vector<int> free_;
  std::vector<int> vert_tri_;
  std::vector<Segment> segs_;
  std::vector<SegmentCurve> curves_;
  std::unordered_map<std::uint64_t, int> seg_index_;
  std::deque<int> seg_queue_;
  std::deque<std::pair<int, std::array<int, 3>>> tri_queue_;
  std::vector<int> cavity_mark_;
  int mark_epoch_ = 0;
  int last_tri_ = 0;
  double ratio_bound_ = 0.0;
  SizeField size_;

  int add_vertex(Point p) {
    pts_.push_back(p);
    vert_tri_.push_back(-1);
    return static_cast<int>(pts_.size()) - 1;
  }

  int new_tri(const DTri& t) {
    int id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
      tris_[id] = t;
    } else {
      id = static_cast<int>(tris_.size());
      tris_.push_back(t);
    }
    if (cavity_mark_.size() < tris_.size()) cavity_mark_.resize(tris_.size(), 0);
    cavity_mark_[id] = 0;
    return id;
  }

  int locate(Point p, int start) const {
    int t = start;
    if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[t].alive) {
      t = 0;
      while (!tris_[t].alive) ++t;
    }
    std::size_t steps = 0;
    int rot = 0;
    while (steps++ < 4 * tris_.size() + 100) {
      const DTri& T = tris_[t];
      int next = -1;
      for (int j = 0; j < 3; ++j) {
        const int k = (j + rot) % 3;
        if (predicates::orient2d(pts_[T.v[(k + 1) % 3]], pts_[T.v[(k + 2) % 3]], p) < 0) {
          next = T.n[k];
          if (next < 0) return -1;
          break;
        }
      }
      if (next < 0) return t;
      t = next;
      rot = (rot + 1) % 3;
    }
    return -1;
  }

  std::vector<int> cavity(Point p, int t0) {
    ++mark_epoch_;
    std::vector<int> cav{t0};
    cavity_mark_[t0] = mark_epoch_;
    for (std::size_t i = 0; i < cav.size(); ++i) {
      const DTri& T = tris_[cav[i]];
      for (int k = 0; k < 3; ++k) {
        const int nb = T.n[k];
        if (nb < 0 || cavity_mark_[nb] == mark_epoch_) continue;
        const DTri& N = tris_[nb];
        if (predicates::incircle(pts_[N.v[0]], pts_[N.v[1]], pts_[N.v[2]], p) > 0) {
          cavity_mark_[nb] = mark_epoch_;
          cav.push_back(nb);
        }
      }
    }
    return cav;
  }

  int insert_in(Point p, int t0) {
    const std::vector<int> cav = cavity(p, t0);
    const int pv = add_vertex(p);
    struct Rim {
      int a, b, outside, region;
    };
    std::vector<Rim> rim;
    for (int c : cav) {
      const DTri& T = tris_[c];
      for (int k = 0; k < 3; ++k) {
        const int nb = T.n[k];
        if (nb >= 0 && cavity_mark_[nb] == mark_epoch_) continue;
        rim.push_back({T.v[(k + 1) % 3], T.v[(k + 2) % 3], nb, T.region});
      }
    }
    for (int c : cav) {
      tris_[c].alive = false;
      free_.push_back(c);
    }
    std::unordered_map<int, int> by_start, by_end;
    std::vector<int> created;
    created.reserve(rim.size());
    for (const Rim& r : rim) {
      const int id = new_tri({{r.a, r.b, pv}, {-1, -1, r.outside}, r.region, true});
      if (r.outside >= 0) {
        DTri& O = tris_[r.outside];
        for (int k = 0; k < 3; ++k)
          if (O.v[(k + 1) % 3] == r.b && O.v[(k + 2) % 3] == r.a) O.n[k] = id;
      }
      by_start[r.a] = id;
      by_end[r.b] = id;
      created.push_back(id);
    }
    for (int id : created) {
      DTri& T = tris_[id];
      T.n[0] = by_start.at(T.v[1]);  // edge (b, p)
      T.n[1] = by_end.at(T.v[0]);    // edge (p, a)
      for (int k = 0; k < 3; ++k) vert_tri_[T.v[k]] = id;
    }
    last_tri_ = created.front();
    for (int id : created) after_insert(id);
    return pv;
  }

  void after_insert(int id) {
    const DTri& T = tris_[id];
    for (int k = 0; k < 3; ++k) {
      const int a = T.v[(k + 1) % 3], b = T.v[(k + 2) % 3];
      if (auto it = seg_index_.find(edge_key(a, b)); it != seg_index_.end() && segs_[it->second].alive)
        seg_queue_.push_back(it->second);
    }
    if (size_ && T.region != 0) tri_queue_.push_back({id, T.v});
  }

  std::pair<int, int> find_edge(int a, int b) const {
    const int start = vert_tri_[a];
    if (start < 0 || !tris_[start].alive) return {-1, -1};
    auto local = [&](int t, int v) {
      for (int k = 0; k < 3; ++k)
        if (tris_[t].v[k] == v) return k;
      return -1;
    };
    for (int dir = 0; dir < 2; ++dir) {
      int t = start;
      for (std::size_t guard = 0; guard < 4096 && t >= 0; ++guard) {
        const int ka = local(t, a);
        if (ka < 0) break;
        for (int k = 0; k < 3; ++k)
          if (tris_[t].v[k] == b) return {t, k};
        // rotate about a: counterclockwise crosses the edge opposite v[ka+2], clockwise the one opposite v[ka+1]
        t = tris_[t].n[dir == 0 ? (ka + 2) % 3 : (ka + 1) % 3];
        if (t == start) break;
      }
    }
    return {-1, -1};
  }

  bool encroached(const Segment& s) const {
    const auto [t, kb] = find_edge(s.a, s.b);
    if (t < 0) return true;
    const Point pa = pts_[s.a], pb = pts_[s.b];
    auto apex_in = [&](int tri) {
      if (tri < 0) return false;
      for (int k = 0; k < 3; ++k) {
        const int v = tris_[tri].v[k];
        if (v == s.a || v == s.b) continue;
        if (v < kSuperVertices) return false;
        return dot(pa - pts_[v], pb - pts_[v]) <= 0.0;
      }
      return false;
    };
    int ka = -1;
    for (int k = 0; k < 3; ++k)
      if (tris_[t].v[k] == s.a) ka = k;
    const int third = 3 - ka - kb;
    return apex_in(t) || apex_in(tris_[t].n[third]);
  }

  Point split_point(const Segment& s) const {
    const Point m = 0.5 * (pts_[s.a] + pts_[s.b]);
    if (s.curve < 0 || !curves_[s.curve].circular) return m;
    const SegmentCurve& c = curves_[s.curve];
    const Point d = m - c.center;
    return c.center + (c.radius / norm(d)) * d;
  }

  void split_segment(int si) {
    const Segment s = segs_[si];
    segs_[si].alive = false;
    seg_index_.erase(edge_key(s.a, s.b));
    const Point m = split_point(s);
    int start = vert_tri_[s.a];
    last_tri_ = start;
    const int t = locate(m, start);
    if (t < 0) fail(ErrorCode::MeshFailure, "segment midpoint could not be located");
    for (int k = 0; k < 3; ++k)
      if (pts_[tris_[t].v[k]] == m) fail(ErrorCode::MeshFailure, "segment midpoint coincides with a vertex");
    const int mv = static_cast<int>(pts_.size());
    add_segment(s.a, mv, s.kind, s.curve);
    add_segment(mv, s.b, s.kind, s.curve);
    insert_in(m, t);
    seg_queue_.push_back(static_cast<int>(segs_.size()) - 2);
    seg_queue_.push_back(static_cast<int>(segs_.size()) - 1);
  }

  void drain_segments(std::size_t cap) {
    while (!seg_queue_.empty()) {
      const int si = seg_queue_.front();
      seg_queue_.pop_front();
      if (!segs_[si].alive || !encroached(segs_[si])) continue;
      split_segment(si);
      if (pts_.size() > cap) fail(ErrorCode::MeshFailure, "vertex budget exceeded during segment recovery");
    }
  }

  bool is_bad(int t) const {
    const DTri& T = tris_[t];
    const Point a = pts_[T.v[0]], b = pts_[T.v[1]], c = pts_[T.v[2]];
    const double la = distance(b, c), lb = distance(c, a), lc = distance(a, b);
    const double lmin = std::min({la, lb, lc}), lmax = std::max({la, lb, lc});
    const double area = 0.5 * cross(b - a, c - a);
    const double R = la * lb * lc / (4.0 * area);
    if (R > ratio_bound_ * lmin) return true;
    return lmax > size_((1.0 / 3.0) * (a + b + c));
  }

  void split_triangle(int t) {
    const DTri& T = tris_[t];
    const Point cc = circumcenter(pts_[T.v[0]], pts_[T.v[1]], pts_[T.v[2]]);
    const int host = locate(cc, t);
    if (host < 0) return;
    const std::vector<int> cav = cavity(cc, host);
    std::vector<int> hit;
    for (int c : cav) {
      const DTri& C = tris_[c];
      for (int k = 0; k < 3; ++k) {
        const int a = C.v[(k + 1) % 3], b = C.v[(k + 2) % 3];
        auto it = seg_index_.find(edge_key(a, b));
        if (it == seg_index_.end() || !segs_[it->second].alive) continue;
        if (dot(pts_[a] - cc, pts_[b] - cc) <= 0.0) hit.push_back(it->second);
      }
    }
    if (!hit.empty()) {
      const std::array<int, 3> verts = T.v;
      std::sort(hit.begin(), hit.end());
      hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
      for (int s : hit)
        if (segs_[s].alive) split_segment(s);
      if (tris_[t].alive && tris_[t].v == verts) tri_queue_.push_back({t, verts});
      return;
    }
    if (tris_[host].region == 0) return;
    for (int k = 0; k < 3; ++k)
      if (pts_[tris_[host].v[k]] == cc) return;
    insert_in(cc, host);
  }
};

}  // namespace robinlab::detail
