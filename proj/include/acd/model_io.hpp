#pragma once

#include <iosfwd>
#include <variant>

#include "acd/baseline.hpp"

namespace acd {

// Versioned flat model file: magic + format tag, a JSON header carrying the
// label set, feature/HA configs and dimensions, then the raw weights as
// little-endian 64-bit floats. Loading validates every dimension.
void save_model(const Policy& policy, std::ostream& out);
void save_model(const LinearClassifier& classifier, std::ostream& out);
void save_model_file(const Policy& policy, const std::string& path);
void save_model_file(const LinearClassifier& classifier, const std::string& path);

using Model = std::variant<Policy, LinearClassifier>;

Model load_model(std::istream& in);
Model load_model_file(const std::string& path);

// The decision rule of whichever model kind was loaded.
AnnotationRule model_rule(const Model& model);
const LabelSet& model_labels(const Model& model);
const FeatureConfig& model_feature_config(const Model& model);
const HAConfig& model_ha_config(const Model& model);

}  // namespace acd
