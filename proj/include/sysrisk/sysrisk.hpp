#pragma once

// Scenario-based engine for scalar systemic risk measures: "first
// aggregate" compositions rho0 o Lambda, "first inject capital" measures
// with group constraints, their dual representations, and capital
// allocation rules including Aumann-Shapley.

#include "sysrisk/aggregation.hpp"
#include "sysrisk/allocation.hpp"
#include "sysrisk/composed.hpp"
#include "sysrisk/config.hpp"
#include "sysrisk/errors.hpp"
#include "sysrisk/inject.hpp"
#include "sysrisk/numerics.hpp"
#include "sysrisk/report.hpp"
#include "sysrisk/rng.hpp"
#include "sysrisk/scenario.hpp"
#include "sysrisk/scenario_io.hpp"
#include "sysrisk/simplex.hpp"
#include "sysrisk/single_firm.hpp"
