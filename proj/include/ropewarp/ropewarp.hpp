#pragma once

#include "ropewarp/attention.hpp"
#include "ropewarp/error.hpp"
#include "ropewarp/flow.hpp"
#include "ropewarp/manifest.hpp"
#include "ropewarp/objective.hpp"
#include "ropewarp/rng.hpp"
#include "ropewarp/rope.hpp"
#include "ropewarp/tensor.hpp"
#include "ropewarp/tnsr.hpp"
#include "ropewarp/trajectory.hpp"
#include "ropewarp/version.hpp"
