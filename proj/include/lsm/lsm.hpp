// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include "lsm/chains.hpp"
#include "lsm/class_model.hpp"
#include "lsm/densities.hpp"
#include "lsm/diagnostics.hpp"
#include "lsm/distance_model.hpp"
#include "lsm/eigen_model.hpp"
#include "lsm/eval.hpp"
#include "lsm/io.hpp"
#include "lsm/math.hpp"
#include "lsm/metropolis.hpp"
#include "lsm/models.hpp"
#include "lsm/network.hpp"
#include "lsm/partition.hpp"
#include "lsm/procrustes.hpp"
#include "lsm/rng.hpp"
#include "lsm/samples.hpp"
