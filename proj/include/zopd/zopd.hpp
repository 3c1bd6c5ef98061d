#pragma once

// Umbrella header.

#include "zopd/baselines.hpp"
#include "zopd/channels.hpp"
#include "zopd/config.hpp"
#include "zopd/duality.hpp"
#include "zopd/harness.hpp"
#include "zopd/policy.hpp"
#include "zopd/primal_dual.hpp"
#include "zopd/problem.hpp"
#include "zopd/random.hpp"
#include "zopd/smoothing.hpp"
#include "zopd/vec.hpp"
