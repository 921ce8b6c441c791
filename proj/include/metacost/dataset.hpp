#pragma once
#include <string>

#include "metacost/types.hpp"

namespace metacost {

// On-disk dataset layout: a directory holding manifest.json (subjects,
// muscle/joint declarations, trial table) plus one CSV per trial with
// header t,<muscle>.a,<muscle>.e,<muscle>.lce,<muscle>.vce,...,
// <joint>.q,<joint>.qdot,<joint>.qddot,<joint>.M and one row per grid
// point. Numbers are written with %.17g so a round trip is bit-exact.

// Validates every invariant; errors name the offending field, trial and
// row. Series whose CSV row count differs from the manifest grid are
// resampled by periodic linear interpolation.
Dataset load_dataset(const std::string& dir);

void write_dataset(const Dataset& ds, const std::string& dir);

// Periodic linear resampling of one cycle from src.size() to n samples.
std::vector<double> resample_periodic(const std::vector<double>& src,
                                      std::size_t n);

} // namespace metacost
