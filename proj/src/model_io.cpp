#include "acd/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace acd {

namespace {

constexpr char kMagic[8] = {'A', 'C', 'D', 'M', 'D', 'L', '0', '1'};
constexpr std::uint32_t kKindPolicy = 1;
constexpr std::uint32_t kKindClassifier = 2;

void write_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw ValidationError("model file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

double read_f64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw ValidationError("model file truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

nlohmann::ordered_json config_header(const LabelSet& labels, const FeatureConfig& fcfg,
                                     const HAConfig& hcfg) {
  nlohmann::ordered_json h;
  h["labels"] = labels.names();
  h["hash_dim"] = fcfg.hash_dim;
  h["markers"] = fcfg.marker_lexicon;
  h["token_count_cap"] = fcfg.token_count_cap;
  h["n_l"] = hcfg.n_l;
  h["n_c"] = hcfg.n_c;
  h["ha_encoding"] = hcfg.encoding == HAEncoding::OneHot ? "onehot" : "scalar";
  return h;
}

void write_header(std::ostream& out, std::uint32_t kind, const nlohmann::ordered_json& h) {
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kind);
  const std::string header = h.dump();
  write_u32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
}

struct ParsedHeader {
  std::uint32_t kind = 0;
  LabelSet labels;
  FeatureConfig fcfg;
  HAConfig hcfg;
};

ParsedHeader read_header(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ValidationError("not a model file (bad magic/version)");
  ParsedHeader parsed;
  parsed.kind = read_u32(in);
  if (parsed.kind != kKindPolicy && parsed.kind != kKindClassifier)
    throw ValidationError("model file has unknown format tag");
  const std::uint32_t len = read_u32(in);
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (!in) throw ValidationError("model file truncated");

  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model header is not valid JSON: ") + e.what());
  }
  parsed.labels = LabelSet(h.at("labels").get<std::vector<std::string>>());
  parsed.fcfg.hash_dim = h.at("hash_dim").get<int>();
  parsed.fcfg.marker_lexicon = h.at("markers").get<std::vector<std::string>>();
  parsed.fcfg.token_count_cap = h.at("token_count_cap").get<int>();
  parsed.hcfg.n_l = h.at("n_l").get<int>();
  parsed.hcfg.n_c = h.at("n_c").get<int>();
  const auto enc = h.at("ha_encoding").get<std::string>();
  if (enc == "onehot") {
    parsed.hcfg.encoding = HAEncoding::OneHot;
  } else if (enc == "scalar") {
    parsed.hcfg.encoding = HAEncoding::Scalar;
  } else {
    throw ValidationError("model header has unknown ha_encoding: " + enc);
  }
  parsed.fcfg.validate();
  parsed.hcfg.validate();
  return parsed;
}

}  // namespace

void save_model(const Policy& policy, std::ostream& out) {
  write_header(out, kKindPolicy, config_header(policy.labels, policy.fcfg, policy.hcfg));
  for (Eigen::Index i = 0; i < policy.weights.size(); ++i) write_f64(out, policy.weights[i]);
}

void save_model(const LinearClassifier& classifier, std::ostream& out) {
  write_header(out, kKindClassifier,
               config_header(classifier.labels, classifier.fcfg, classifier.hcfg));
  for (Eigen::Index r = 0; r < classifier.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < classifier.weights.cols(); ++c)
      write_f64(out, classifier.weights(r, c));
  }
  for (Eigen::Index i = 0; i < classifier.bias.size(); ++i) write_f64(out, classifier.bias[i]);
}

Model load_model(std::istream& in) {
  const ParsedHeader h = read_header(in);
  const int a = h.labels.size();
  const int n = state_dim(h.fcfg, h.hcfg, a);
  if (h.kind == kKindPolicy) {
    Policy policy;
    policy.labels = h.labels;
    policy.fcfg = h.fcfg;
    policy.hcfg = h.hcfg;
    policy.weights.resize(static_cast<Eigen::Index>(n) * a);
    for (Eigen::Index i = 0; i < policy.weights.size(); ++i) policy.weights[i] = read_f64(in);
    return policy;
  }
  LinearClassifier classifier;
  classifier.labels = h.labels;
  classifier.fcfg = h.fcfg;
  classifier.hcfg = h.hcfg;
  classifier.weights.resize(a, n);
  for (Eigen::Index r = 0; r < a; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) classifier.weights(r, c) = read_f64(in);
  }
  classifier.bias.resize(a);
  for (Eigen::Index i = 0; i < a; ++i) classifier.bias[i] = read_f64(in);
  return classifier;
}

void save_model_file(const Policy& policy, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  save_model(policy, out);
}

void save_model_file(const LinearClassifier& classifier, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  save_model(classifier, out);
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file: " + path);
  return load_model(in);
}

AnnotationRule model_rule(const Model& model) {
  if (const auto* policy = std::get_if<Policy>(&model)) return as_rule(*policy);
  return as_policy(std::get<LinearClassifier>(model));
}

const LabelSet& model_labels(const Model& model) {
  if (const auto* policy = std::get_if<Policy>(&model)) return policy->labels;
  return std::get<LinearClassifier>(model).labels;
}

const FeatureConfig& model_feature_config(const Model& model) {
  if (const auto* policy = std::get_if<Policy>(&model)) return policy->fcfg;
  return std::get<LinearClassifier>(model).fcfg;
}

const HAConfig& model_ha_config(const Model& model) {
  if (const auto* policy = std::get_if<Policy>(&model)) return policy->hcfg;
  return std::get<LinearClassifier>(model).hcfg;
}

}  // namespace acd
