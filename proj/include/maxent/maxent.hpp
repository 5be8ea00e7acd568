#pragma once

#include "maxent/brascamp_lieb.hpp"
#include "maxent/capacity.hpp"
#include "maxent/dual_solver.hpp"
#include "maxent/errors.hpp"
#include "maxent/experiments.hpp"
#include "maxent/instance_io.hpp"
#include "maxent/linalg.hpp"
#include "maxent/lp.hpp"
#include "maxent/minnorm.hpp"
#include "maxent/numeric.hpp"
#include "maxent/oracle.hpp"
#include "maxent/polytope.hpp"
#include "maxent/rng.hpp"
#include "maxent/scaling.hpp"
#include "maxent/support.hpp"
#include "maxent/witness.hpp"
