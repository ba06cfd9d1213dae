#pragma once

// Umbrella header.

#include "greencone/core.hpp"
#include "greencone/symplectic_cones.hpp"
#include "greencone/semiconcavity.hpp"
#include "greencone/tonelli.hpp"
#include "greencone/green_dynamics.hpp"
#include "greencone/action.hpp"
#include "greencone/weak_kam.hpp"
#include "greencone/verification.hpp"
#include "greencone/sampling.hpp"
#include "greencone/synthetic.hpp"
#include "greencone/suites.hpp"
#include "greencone/io.hpp"
