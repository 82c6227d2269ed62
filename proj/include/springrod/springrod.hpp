#pragma once

// Umbrella header: the whole engine and identification stack.

#include "springrod/accel_gen.hpp"
#include "springrod/engine.hpp"
#include "springrod/errors.hpp"
#include "springrod/force_gen.hpp"
#include "springrod/gradient.hpp"
#include "springrod/integrator.hpp"
#include "springrod/oracle.hpp"
#include "springrod/params.hpp"
#include "springrod/quat.hpp"
#include "springrod/rng.hpp"
#include "springrod/rod.hpp"
#include "springrod/topology.hpp"
#include "springrod/vec3.hpp"

#include "springrod/sysid/composites.hpp"
#include "springrod/sysid/control.hpp"
#include "springrod/sysid/descent.hpp"
#include "springrod/sysid/features.hpp"
#include "springrod/sysid/identify.hpp"
#include "springrod/sysid/koopman.hpp"
#include "springrod/sysid/regression.hpp"
