#pragma once

// Umbrella header for the whole library.

#include "fdqn/agent.hpp"
#include "fdqn/checkpoint.hpp"
#include "fdqn/config.hpp"
#include "fdqn/envs/registry.hpp"
#include "fdqn/errors.hpp"
#include "fdqn/log.hpp"
#include "fdqn/matrix.hpp"
#include "fdqn/metrics.hpp"
#include "fdqn/nn.hpp"
#include "fdqn/observation.hpp"
#include "fdqn/replay.hpp"
#include "fdqn/rng.hpp"
#include "fdqn/runner.hpp"
