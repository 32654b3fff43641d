#pragma once

// Umbrella header for the multi-instance classification library.

#include "multinst/aggregate.hpp"
#include "multinst/analytic.hpp"
#include "multinst/core.hpp"
#include "multinst/erf.hpp"
#include "multinst/io.hpp"
#include "multinst/rng.hpp"
#include "multinst/stats.hpp"
#include "multinst/synth.hpp"
#include "multinst/train.hpp"
