#pragma once

#include "hbmtherm/analysis.hpp"
#include "hbmtherm/config.hpp"
#include "hbmtherm/error.hpp"
#include "hbmtherm/export.hpp"
#include "hbmtherm/fvm.hpp"
#include "hbmtherm/materials.hpp"
#include "hbmtherm/oracle.hpp"
#include "hbmtherm/solve.hpp"
#include "hbmtherm/stack.hpp"
#include "hbmtherm/sweep.hpp"
#include "hbmtherm/verify.hpp"
#include "hbmtherm/voxel.hpp"
