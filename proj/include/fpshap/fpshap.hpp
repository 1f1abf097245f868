#pragma once

// Umbrella header: Shapley value estimation via weighted least squares with
// stratified without-replacement coalition sampling and finite-population
// bootstrap uncertainty.

#include "fpshap/bootstrap.hpp"
#include "fpshap/coalition.hpp"
#include "fpshap/dataset.hpp"
#include "fpshap/errors.hpp"
#include "fpshap/kernel.hpp"
#include "fpshap/oracle.hpp"
#include "fpshap/report.hpp"
#include "fpshap/rng.hpp"
#include "fpshap/sampling.hpp"
#include "fpshap/shapley.hpp"
#include "fpshap/study.hpp"
#include "fpshap/wallenius.hpp"
#include "fpshap/wls.hpp"
