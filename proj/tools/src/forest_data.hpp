#pragma once

#include <span>

#include "ctp/embed.hpp"
#include "ctp/forest.hpp"
#include "ctp/linkage.hpp"

namespace ctp::cli {

/// Forest dataset of the labeled `entries`, in their order, with feature rows
/// looked up by nct_id. Throws InvalidArgument for a trial missing from `m`.
rf::Dataset join_features(const FeatureMatrix& m, std::span<const LabeledTrial> entries);

}  // namespace ctp::cli
