#pragma once

#include "hotv/geometry.hpp"
#include "hotv/io.hpp"
#include "hotv/metrics.hpp"
#include "hotv/pa.hpp"
#include "hotv/phantom.hpp"
#include "hotv/radon.hpp"
#include "hotv/solvers.hpp"
#include "hotv/types.hpp"
