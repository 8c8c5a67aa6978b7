#pragma once

// Umbrella header for the CAPS policy-reuse library.

#include "caps/baselines.hpp"
#include "caps/checkpoint.hpp"
#include "caps/error.hpp"
#include "caps/experiment.hpp"
#include "caps/gridworld.hpp"
#include "caps/learner.hpp"
#include "caps/maps.hpp"
#include "caps/mdp.hpp"
#include "caps/metrics.hpp"
#include "caps/options.hpp"
#include "caps/rng.hpp"
#include "caps/types.hpp"
#include "caps/value_iteration.hpp"
#include "caps/value_table.hpp"
