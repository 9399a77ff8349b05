#pragma once

#include "stulc/error.hpp"
#include "stulc/vec3.hpp"
#include "stulc/numerics/quadrature.hpp"
#include "stulc/numerics/rng.hpp"
#include "stulc/numerics/special.hpp"
#include "stulc/geometry.hpp"
#include "stulc/atmosphere.hpp"
#include "stulc/interface.hpp"
#include "stulc/sea_surface.hpp"
#include "stulc/underwater.hpp"
#include "stulc/channel.hpp"
#include "stulc/metrics.hpp"
#include "stulc/scenario.hpp"
#include "stulc/pipeline.hpp"
#include "stulc/report.hpp"
