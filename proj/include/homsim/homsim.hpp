#pragma once

// Umbrella header for the homsim library: resonance-fluorescence dynamics of
// a driven Lambda-system ion, two-emitter beam-splitter interference,
// detection-chain modeling, photon-stream Monte Carlo, and time-tag
// correlation analysis.

#include "homsim/angular.hpp"
#include "homsim/config_io.hpp"
#include "homsim/correlator.hpp"
#include "homsim/csv.hpp"
#include "homsim/detection.hpp"
#include "homsim/dynamics.hpp"
#include "homsim/errors.hpp"
#include "homsim/interference.hpp"
#include "homsim/level_scheme.hpp"
#include "homsim/liouvillian.hpp"
#include "homsim/montecarlo.hpp"
#include "homsim/operators.hpp"
#include "homsim/rng.hpp"
#include "homsim/system_config.hpp"
#include "homsim/timetag.hpp"
#include "homsim/units.hpp"
