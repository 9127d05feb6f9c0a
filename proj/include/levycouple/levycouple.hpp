#pragma once

// Umbrella header.

#include "levycouple/common.hpp"
#include "levycouple/config.hpp"
#include "levycouple/coupling.hpp"
#include "levycouple/distance.hpp"
#include "levycouple/drift.hpp"
#include "levycouple/interpolation.hpp"
#include "levycouple/levy_measure.hpp"
#include "levycouple/metrics.hpp"
#include "levycouple/quadrature.hpp"
#include "levycouple/report.hpp"
#include "levycouple/rng.hpp"
