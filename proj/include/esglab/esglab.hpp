#pragma once

#include "esglab/calibration.hpp"
#include "esglab/cli.hpp"
#include "esglab/config.hpp"
#include "esglab/generation.hpp"
#include "esglab/linalg.hpp"
#include "esglab/optimize.hpp"
#include "esglab/report_io.hpp"
#include "esglab/rng.hpp"
#include "esglab/stability.hpp"
#include "esglab/tree.hpp"
#include "esglab/types.hpp"
#include "esglab/version.hpp"
