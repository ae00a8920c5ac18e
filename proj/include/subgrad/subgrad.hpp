#pragma once

// Umbrella header for the subgradient-method testbed library.

#include "subgrad/errors.hpp"
#include "subgrad/flow.hpp"
#include "subgrad/instances.hpp"
#include "subgrad/io.hpp"
#include "subgrad/landscape.hpp"
#include "subgrad/matrix.hpp"
#include "subgrad/objective.hpp"
#include "subgrad/rip.hpp"
#include "subgrad/rng.hpp"
#include "subgrad/run.hpp"
#include "subgrad/schedule.hpp"
