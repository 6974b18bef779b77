#pragma once

#include "robinlab/error.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/predicates.hpp"
#include "robinlab/mesh.hpp"
#include "robinlab/fem.hpp"
#include "robinlab/eigensolve.hpp"
#include "robinlab/spectral_metrics.hpp"
#include "robinlab/oracle.hpp"
#include "robinlab/quadrature.hpp"
#include "robinlab/test_functions.hpp"
#include "robinlab/closeness_lab.hpp"
#include "robinlab/svg.hpp"
#include "robinlab/experiments.hpp"
