#pragma once

// Umbrella header for the whole toolkit.

#include "cogsense/core.hpp"
#include "cogsense/image.hpp"
#include "cogsense/tracker.hpp"
#include "cogsense/probes.hpp"
#include "cogsense/axiom.hpp"
#include "cogsense/distribution.hpp"
#include "cogsense/monitor.hpp"
#include "cogsense/adaptation.hpp"
#include "cogsense/calibration.hpp"
#include "cogsense/sim/random.hpp"
#include "cogsense/sim/scene.hpp"
#include "cogsense/sim/detector.hpp"
#include "cogsense/sim/metrics.hpp"
#include "cogsense/sim/closed_loop.hpp"
#include "cogsense/io.hpp"
