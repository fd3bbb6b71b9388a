#pragma once

// Umbrella header: detection and localization of change points in
// functional time series, at every scale simultaneously.  Pull in
// everything; individual headers are fine too.

#include "multiscan/bootstrap.hpp"
#include "multiscan/bspline.hpp"
#include "multiscan/covariance.hpp"
#include "multiscan/dgp.hpp"
#include "multiscan/fts.hpp"
#include "multiscan/index_set.hpp"
#include "multiscan/io.hpp"
#include "multiscan/parallel.hpp"
#include "multiscan/pipeline.hpp"
#include "multiscan/rng.hpp"
#include "multiscan/scan.hpp"
#include "multiscan/weights.hpp"
