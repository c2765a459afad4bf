#pragma once

#include <filesystem>

#include "sepolml/features.hpp"
#include "sepolml/model.hpp"

namespace sepolml {

/// A trained classifier plus the feature layout it expects. Saved as
/// versioned JSON; loading validates the format marker and version so a
/// stale or foreign file fails with a clear message instead of garbage
/// predictions.
struct ModelBundle {
  std::unique_ptr<Classifier> model;
  FeatureSpec feature_spec;
  int label_count = 0;
};

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

}  // namespace sepolml
