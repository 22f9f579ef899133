#pragma once

#include "ajscc/analytic.hpp"
#include "ajscc/crossing.hpp"
#include "ajscc/curve.hpp"
#include "ajscc/dist.hpp"
#include "ajscc/mc.hpp"
#include "ajscc/numerics.hpp"
#include "ajscc/opt.hpp"
#include "ajscc/parallel.hpp"
#include "ajscc/rng.hpp"
