#pragma once

// Umbrella header.

#include "bmc/ambient.hpp"
#include "bmc/builders.hpp"
#include "bmc/catalog.hpp"
#include "bmc/chart.hpp"
#include "bmc/config.hpp"
#include "bmc/conformal.hpp"
#include "bmc/curvature.hpp"
#include "bmc/error.hpp"
#include "bmc/geodesic.hpp"
#include "bmc/iso_net.hpp"
#include "bmc/lifting.hpp"
#include "bmc/limits.hpp"
#include "bmc/mesh.hpp"
#include "bmc/primitives.hpp"
#include "bmc/scenario.hpp"
#include "bmc/schwarz.hpp"
