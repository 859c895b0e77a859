// Convenience include for the whole library.
#pragma once

#include "quadrise/analysis.hpp"
#include "quadrise/config.hpp"
#include "quadrise/controller.hpp"
#include "quadrise/dynamics.hpp"
#include "quadrise/harness.hpp"
#include "quadrise/rk4.hpp"
#include "quadrise/runlog.hpp"
#include "quadrise/scenario.hpp"
#include "quadrise/simulation.hpp"
#include "quadrise/trajectory.hpp"
#include "quadrise/types.hpp"
