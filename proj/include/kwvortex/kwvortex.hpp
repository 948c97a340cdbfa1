#pragma once

#include "kwvortex/error.hpp"
#include "kwvortex/fft.hpp"
#include "kwvortex/legendre.hpp"
#include "kwvortex/manifold.hpp"
#include "kwvortex/operators.hpp"
#include "kwvortex/kw_solver.hpp"
#include "kwvortex/vortex_geometry.hpp"
#include "kwvortex/metric.hpp"
#include "kwvortex/blowup.hpp"
#include "kwvortex/expression.hpp"
#include "kwvortex/fixtures.hpp"
#include "kwvortex/config.hpp"
#include "kwvortex/report.hpp"
#include "kwvortex/experiments.hpp"
