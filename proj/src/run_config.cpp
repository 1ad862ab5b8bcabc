#include "acd/run_config.hpp"

#include <fstream>
#include <sstream>

namespace acd {

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  RunConfig rc;
  try {
    rc.values_ = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config is not a valid JSON object: ") + e.what());
  }
  if (!rc.values_.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : rc.values_.items()) {
    if (value.is_object())
      throw ValidationError("config key \"" + key + "\" must be a flat value, not an object");
  }
  return rc;
}

void RunConfig::set(const std::string& key, const nlohmann::json& value) {
  values_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return values_.contains(key); }

template <typename T>
T RunConfig::get_or(const std::string& key, T fallback, const char* type_name) const {
  T out = std::move(fallback);
  if (values_.contains(key)) {
    try {
      out = values_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("config key \"" + key + "\" must be a " + type_name);
    }
  }
  resolved_[key] = out;
  return out;
}

template <typename T>
T RunConfig::require(const std::string& key, const char* type_name) const {
  if (!values_.contains(key))
    throw ValidationError("missing required config key \"" + key + "\"");
  return get_or<T>(key, T{}, type_name);
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  return get_or<int>(key, fallback, "integer");
}
int RunConfig::require_int(const std::string& key) const {
  return require<int>(key, "integer");
}
double RunConfig::get_double(const std::string& key, double fallback) const {
  return get_or<double>(key, fallback, "number");
}
std::uint64_t RunConfig::require_seed() const {
  return require<std::uint64_t>("seed", "non-negative integer");
}
std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get_or<std::string>(key, fallback, "string");
}
std::string RunConfig::require_string(const std::string& key) const {
  return require<std::string>(key, "string");
}
bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  return get_or<bool>(key, fallback, "boolean");
}
std::vector<std::string> RunConfig::get_strings(const std::string& key,
                                                std::vector<std::string> fallback) const {
  return get_or<std::vector<std::string>>(key, std::move(fallback), "string array");
}
std::vector<double> RunConfig::get_doubles(const std::string& key,
                                           std::vector<double> fallback) const {
  return get_or<std::vector<double>>(key, std::move(fallback), "number array");
}
std::vector<std::vector<double>> RunConfig::get_matrix(
    const std::string& key, std::vector<std::vector<double>> fallback) const {
  return get_or<std::vector<std::vector<double>>>(key, std::move(fallback),
                                                  "array of number arrays");
}

std::vector<std::string> RunConfig::unused_keys() const {
  std::vector<std::string> unused;
  for (const auto& [key, value] : values_.items()) {
    (void)value;
    if (key != "command" && !resolved_.contains(key)) unused.push_back(key);
  }
  return unused;
}

std::string RunConfig::manifest(const std::string& command) const {
  nlohmann::json m = resolved_;  // plain json keeps keys sorted: canonical
  m["command"] = command;
  return m.dump();
}

FeatureConfig feature_config_from(const RunConfig& rc) {
  FeatureConfig f;
  f.hash_dim = rc.get_int("hash_dim", f.hash_dim);
  f.marker_lexicon = rc.get_strings("markers", f.marker_lexicon);
  f.token_count_cap = rc.get_int("token_count_cap", f.token_count_cap);
  f.validate();
  return f;
}

HAConfig ha_config_from(const RunConfig& rc) {
  HAConfig h;
  h.n_l = rc.get_int("n_l", h.n_l);
  h.n_c = rc.get_int("n_c", h.n_c);
  const std::string enc = rc.get_string("ha_encoding", "onehot");
  if (enc == "onehot") {
    h.encoding = HAEncoding::OneHot;
  } else if (enc == "scalar") {
    h.encoding = HAEncoding::Scalar;
  } else {
    throw ValidationError("config key \"ha_encoding\" must be \"onehot\" or \"scalar\"");
  }
  h.validate();
  return h;
}

LspiConfig lspi_config_from(const RunConfig& rc) {
  LspiConfig l;
  l.gamma = rc.get_double("gamma", l.gamma);
  l.episodes = rc.get_int("episodes", l.episodes);
  l.ridge = rc.get_double("ridge", l.ridge);
  l.policy_tolerance = rc.get_double("policy_tolerance", l.policy_tolerance);
  l.max_policy_iterations = rc.get_int("max_policy_iterations", l.max_policy_iterations);
  l.epsilon0 = rc.get_double("epsilon0", l.epsilon0);
  l.epsilon_decay = rc.get_double("epsilon_decay", l.epsilon_decay);
  l.epsilon_floor = rc.get_double("epsilon_floor", l.epsilon_floor);
  l.validate();
  return l;
}

BaselineHyper baseline_hyper_from(const RunConfig& rc) {
  BaselineHyper b;
  b.learning_rate = rc.get_double("learning_rate", b.learning_rate);
  b.l2 = rc.get_double("l2", b.l2);
  b.max_epochs = rc.get_int("max_epochs", b.max_epochs);
  b.patience = rc.get_int("patience", b.patience);
  b.ha_rounds = rc.get_int("ha_rounds", b.ha_rounds);
  b.batch_size = rc.get_int("batch_size", b.batch_size);
  b.validate();
  return b;
}

PipelineConfig pipeline_config_from(const RunConfig& rc) {
  PipelineConfig p;
  p.features = feature_config_from(rc);
  p.ha = ha_config_from(rc);
  p.lspi = lspi_config_from(rc);
  p.baseline = baseline_hyper_from(rc);
  p.rounds_budget = rc.get_int("rounds", p.rounds_budget);
  if (p.rounds_budget < 1) throw ValidationError("config key \"rounds\" must be >= 1");
  return p;
}

SynthConfig synth_config_from(const RunConfig& rc) {
  SynthConfig s;
  s.labels = rc.get_strings("labels", {"claim", "premise", "background", "other"});
  const int a = static_cast<int>(s.labels.size());
  s.num_documents = rc.get_int("num_documents", 60);
  s.clauses_per_doc = {rc.get_int("clauses_lo", 8), rc.get_int("clauses_hi", 15)};
  s.tokens_per_clause = {rc.get_int("tokens_lo", 4), rc.get_int("tokens_hi", 9)};
  s.lexical_ambiguity = rc.get_double("lexical_ambiguity", 0.6);

  // default transition: dominant move to the next label in a cycle, so
  // neighbour annotations carry real signal
  std::vector<std::vector<double>> transition;
  if (a >= 2) {
    transition.assign(a, std::vector<double>(a, 0.0));
    for (int i = 0; i < a; ++i) {
      if (a == 2) {
        transition[i][i] = 0.3;
        transition[i][(i + 1) % a] = 0.7;
      } else {
        transition[i][(i + 1) % a] = 0.7;
        transition[i][i] = 0.15;
        for (int j = 0; j < a; ++j) {
          if (j != i && j != (i + 1) % a) transition[i][j] = 0.15 / (a - 2);
        }
      }
    }
  }
  s.label_transition = rc.get_matrix("label_transition", transition);
  s.initial_label_dist =
      rc.get_doubles("initial_label_dist", std::vector<double>(a, 1.0 / a));

  std::vector<std::string> vocabulary = rc.get_strings("vocabulary", {});
  std::vector<std::vector<double>> vocab_per_label =
      rc.get_matrix("vocab_per_label", {});
  if (vocabulary.empty() != vocab_per_label.empty())
    throw ValidationError(
        "config keys \"vocabulary\" and \"vocab_per_label\" must be given together");
  const int words_per_label = rc.get_int("words_per_label", 20);
  const int shared_words = rc.get_int("shared_words", 40);
  if (vocabulary.empty()) {
    if (words_per_label < 1 || shared_words < 0)
      throw ValidationError("config vocabulary sizes must be positive");
    for (int i = 0; i < a; ++i) {
      for (int j = 0; j < words_per_label; ++j)
        vocabulary.push_back("t" + std::to_string(i) + "w" + std::to_string(j));
    }
    for (int j = 0; j < shared_words; ++j) vocabulary.push_back("g" + std::to_string(j));
    vocab_per_label.assign(a, std::vector<double>(vocabulary.size(), 0.0));
    for (int i = 0; i < a; ++i) {
      for (int j = 0; j < words_per_label; ++j)
        vocab_per_label[i][i * words_per_label + j] = 1.0 / words_per_label;
    }
  }
  s.vocabulary = std::move(vocabulary);
  s.vocab_per_label = std::move(vocab_per_label);
  s.validate();
  return s;
}

}  // namespace acd
