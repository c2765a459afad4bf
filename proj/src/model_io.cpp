#include "sepolml/model_io.hpp"

#include <fstream>

#include "sepolml/errors.hpp"

namespace sepolml {

namespace {
constexpr const char* kFormatMarker = "sepolml-model";
constexpr int kFormatVersion = 1;
}  // namespace

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
  if (!bundle.model) throw Error("cannot save an empty model bundle");
  nlohmann::ordered_json out;
  out["format"] = kFormatMarker;
  out["format_version"] = kFormatVersion;
  out["label_count"] = bundle.label_count;
  out["feature_spec"] = {
      {"embedding_dimensions", bundle.feature_spec.embedding_dimensions},
      {"permission_vocabulary", bundle.feature_spec.permission_vocabulary},
  };
  out["model"] = bundle.model->to_json();

  std::ofstream file(path);
  if (!file) throw Error("cannot write model to " + path.string());
  file << out.dump(2) << '\n';
  if (!file) throw Error("failed writing model to " + path.string());
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw Error("cannot read model from " + path.string());
  nlohmann::json parsed;
  try {
    file >> parsed;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed model file " + path.string() + ": " + e.what());
  }

  ModelBundle bundle;
  try {
    if (parsed.at("format").get<std::string>() != kFormatMarker) {
      throw Error(path.string() + " is not a model file");
    }
    const int version = parsed.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw Error("model file " + path.string() + " uses format version " +
                  std::to_string(version) + "; this build reads version " +
                  std::to_string(kFormatVersion));
    }
    bundle.label_count = parsed.at("label_count").get<int>();
    bundle.feature_spec.embedding_dimensions =
        parsed.at("feature_spec").at("embedding_dimensions").get<int>();
    bundle.feature_spec.permission_vocabulary =
        parsed.at("feature_spec").at("permission_vocabulary").get<std::vector<Permission>>();
    bundle.model = classifier_from_json(parsed.at("model"));
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed model file " + path.string() + ": " + e.what());
  }
  return bundle;
}

}  // namespace sepolml
