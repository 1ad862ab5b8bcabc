#include "acd/features.hpp"

#include <algorithm>
#include <unordered_set>

namespace acd {

std::vector<std::string> default_marker_lexicon() {
  return {"because", "since",  "therefore", "however", "but",       "so",
          "think",   "believe", "reason",   "should",  "recommend", "overall"};
}

void FeatureConfig::validate() const {
  if (hash_dim < 1) throw ValidationError("hash_dim must be >= 1");
  if (token_count_cap < 1) throw ValidationError("token_count_cap must be >= 1");
  std::unordered_set<std::string_view> seen;
  for (const auto& m : marker_lexicon) {
    if (m.empty() || !seen.insert(m).second)
      throw ValidationError("marker lexicon entries must be unique and non-empty");
    for (unsigned char c : m) {
      if (c < 128 && std::isupper(c))
        throw ValidationError("marker lexicon entries must be lowercase: " + m);
    }
  }
}

void HAConfig::validate() const {
  if (n_l < 0 || n_c < 0) throw ValidationError("HA window sizes must be >= 0");
}

StateVector base_features(const Clause& clause, int position, const Document& doc,
                          const FeatureConfig& cfg) {
  const int len = static_cast<int>(doc.clauses.size());
  if (position < 0 || position >= len)
    throw std::out_of_range("base_features: position outside document");

  StateVector v = StateVector::Zero(cfg.base_dim());
  const auto& tokens = clause.tokens;
  const double token_count = static_cast<double>(tokens.size());

  // structural block
  v[0] = len > 1 ? static_cast<double>(position) / (len - 1) : 0.0;
  v[1] = position == 0 ? 1.0 : 0.0;
  v[2] = position == len - 1 ? 1.0 : 0.0;
  v[3] = std::min(token_count, static_cast<double>(cfg.token_count_cap)) / cfg.token_count_cap;
  std::size_t chars_before = 0, chars_total = 0;
  for (int i = 0; i < len; ++i) {
    if (i < position) chars_before += doc.clauses[i].text.size();
    chars_total += doc.clauses[i].text.size();
  }
  v[4] = chars_total > 0 ? static_cast<double>(chars_before) / chars_total : 0.0;
  v[5] = clause.text.find('?') != std::string::npos ? 1.0 : 0.0;
  v[6] = clause.text.find('!') != std::string::npos ? 1.0 : 0.0;
  const double commas = static_cast<double>(std::count(clause.text.begin(), clause.text.end(), ','));
  v[7] = token_count > 0 ? commas / token_count : 0.0;

  // hashed unigram + bigram counts, normalised by token count
  if (token_count > 0) {
    const int offset = 8;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      v[offset + static_cast<int>(fnv1a64(tokens[i]) % cfg.hash_dim)] += 1.0;
      if (i + 1 < tokens.size()) {
        const std::string bigram = tokens[i] + " " + tokens[i + 1];
        v[offset + static_cast<int>(fnv1a64(bigram) % cfg.hash_dim)] += 1.0;
      }
    }
    v.segment(offset, cfg.hash_dim) /= token_count;
  }

  // marker presence flags
  const int marker_offset = 8 + cfg.hash_dim;
  for (std::size_t m = 0; m < cfg.marker_lexicon.size(); ++m) {
    const auto& marker = cfg.marker_lexicon[m];
    if (std::find(tokens.begin(), tokens.end(), marker) != tokens.end())
      v[marker_offset + static_cast<int>(m)] = 1.0;
  }
  return v;
}

namespace {

void encode_slot(StateVector& out, int slot_index, std::optional<int> label,
                 const HAConfig& cfg, int num_labels) {
  if (cfg.encoding == HAEncoding::OneHot) {
    // sentinel = all-zeros block; a label sets exactly one coordinate
    if (label) out[slot_index * (num_labels + 1) + *label] = 1.0;
  } else {
    out[slot_index] = label ? static_cast<double>(*label + 1) / num_labels : 0.0;
  }
}

std::optional<int> label_at(const std::vector<std::optional<int>>& round, int index) {
  if (index < 0 || index >= static_cast<int>(round.size())) return std::nullopt;
  return round[index];
}

}  // namespace

StateVector ha_slots(int position, const AnnotationHistory& history,
                     const HAConfig& cfg, int num_labels) {
  StateVector v = StateVector::Zero(cfg.block_dim(num_labels));
  int slot = 0;

  // type-L: window of last-round labels centred on the target clause; for
  // even widths the extra slot goes to the preceding side
  const int start = cfg.n_l % 2 == 1 ? -(cfg.n_l - 1) / 2 : -cfg.n_l / 2;
  for (int o = 0; o < cfg.n_l; ++o, ++slot) {
    encode_slot(v, slot, label_at(history.last_round, position + start + o), cfg, num_labels);
  }

  // type-C: labels already assigned this round, offsets -n_c .. -1
  for (int o = -cfg.n_c; o < 0; ++o, ++slot) {
    encode_slot(v, slot, label_at(history.current_round, position + o), cfg, num_labels);
  }
  return v;
}

StateVector assemble_state(const StateVector& base, const StateVector& ha_block) {
  StateVector v(base.size() + ha_block.size());
  v << base, ha_block;
  return v;
}

StateVector state_action_vector(const StateVector& state, int action, int num_labels) {
  if (action < 0 || action >= num_labels)
    throw std::out_of_range("state_action_vector: action outside label set");
  const auto n = state.size();
  StateVector v = StateVector::Zero(n * num_labels);
  v.segment(action * n, n) = state;
  return v;
}

Featurizer::Featurizer(FeatureConfig fcfg, HAConfig hcfg, LabelSet labels)
    : fcfg_(std::move(fcfg)), hcfg_(hcfg), labels_(std::move(labels)) {
  fcfg_.validate();
  hcfg_.validate();
}

StateVector Featurizer::state(const Document& doc, int position,
                              const AnnotationHistory& history) const {
  return assemble_state(base_features(doc.clauses.at(position), position, doc, fcfg_),
                        ha_slots(position, history, hcfg_, labels_.size()));
}

}  // namespace acd
