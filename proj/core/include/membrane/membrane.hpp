#pragma once

#include "membrane/asymptotics.hpp"
#include "membrane/error.hpp"
#include "membrane/exponent.hpp"
#include "membrane/geometry.hpp"
#include "membrane/hitting.hpp"
#include "membrane/predictor.hpp"
#include "membrane/rng.hpp"
#include "membrane/simulate.hpp"
#include "membrane/solve.hpp"
#include "membrane/stats.hpp"
#include "membrane/verify.hpp"
