#pragma once

#include "portalwave/bake.hpp"
#include "portalwave/bakefile.hpp"
#include "portalwave/engine.hpp"
#include "portalwave/fieldstore.hpp"
#include "portalwave/math.hpp"
#include "portalwave/occlusion.hpp"
#include "portalwave/oracle.hpp"
#include "portalwave/portalsearch.hpp"
#include "portalwave/scene.hpp"
#include "portalwave/scenegen.hpp"
