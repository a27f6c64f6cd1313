#pragma once

#include "irsbeam/allocation.hpp"
#include "irsbeam/beamformers.hpp"
#include "irsbeam/channel_model.hpp"
#include "irsbeam/core.hpp"
#include "irsbeam/engine.hpp"
#include "irsbeam/metrics.hpp"
#include "irsbeam/montecarlo.hpp"
#include "irsbeam/phase_update.hpp"
#include "irsbeam/scenario.hpp"
