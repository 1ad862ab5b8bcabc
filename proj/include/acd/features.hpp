#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "acd/corpus.hpp"

namespace acd {

using StateVector = Eigen::VectorXd;

std::vector<std::string> default_marker_lexicon();

// Conventional per-clause linguistic features: 8 structural values, a
// hashed unigram/bigram block of hash_dim buckets, and one binary flag per
// discourse marker. base_dim() = 8 + hash_dim + |marker_lexicon|.
struct FeatureConfig {
  int hash_dim = 256;
  std::vector<std::string> marker_lexicon = default_marker_lexicon();
  int token_count_cap = 50;

  int base_dim() const { return 8 + hash_dim + static_cast<int>(marker_lexicon.size()); }
  void validate() const;
  bool operator==(const FeatureConfig&) const = default;
};

enum class HAEncoding { OneHot, Scalar };

// Historical-annotation windows: n_l slots over the previous round's labels
// around the target clause, n_c slots over the labels already assigned in
// the current round.
struct HAConfig {
  int n_l = 0;
  int n_c = 0;
  HAEncoding encoding = HAEncoding::OneHot;

  // width of one slot: |A|+1 one-hot (the extra coordinate is reserved for
  // the "none" sentinel), 1 in scalar mode
  int slot_width(int num_labels) const {
    return encoding == HAEncoding::OneHot ? num_labels + 1 : 1;
  }
  int block_dim(int num_labels) const { return (n_l + n_c) * slot_width(num_labels); }
  void validate() const;
  bool operator==(const HAConfig&) const = default;
};

inline int state_dim(const FeatureConfig& fcfg, const HAConfig& hcfg, int num_labels) {
  return fcfg.base_dim() + hcfg.block_dim(num_labels);
}

// Labels seen by the annotator so far: last_round holds one entry per clause
// of the document (nullopt where unannotated), current_round holds entries
// exactly for the positions already labelled in this round.
struct AnnotationHistory {
  std::vector<std::optional<int>> last_round;
  std::vector<std::optional<int>> current_round;
};

StateVector base_features(const Clause& clause, int position, const Document& doc,
                          const FeatureConfig& cfg);

StateVector ha_slots(int position, const AnnotationHistory& history,
                     const HAConfig& cfg, int num_labels);

StateVector assemble_state(const StateVector& base, const StateVector& ha_block);

// Block basis for the linear Q-function: the state occupies block `action`
// of an N*|A| vector, all other blocks zero.
StateVector state_action_vector(const StateVector& state, int action, int num_labels);

// Convenience binding of the two configs plus the label set.
class Featurizer {
 public:
  Featurizer(FeatureConfig fcfg, HAConfig hcfg, LabelSet labels);

  StateVector state(const Document& doc, int position,
                    const AnnotationHistory& history) const;
  int dim() const { return state_dim(fcfg_, hcfg_, labels_.size()); }
  int num_labels() const { return labels_.size(); }
  const FeatureConfig& feature_config() const { return fcfg_; }
  const HAConfig& ha_config() const { return hcfg_; }
  const LabelSet& labels() const { return labels_; }

 private:
  FeatureConfig fcfg_;
  HAConfig hcfg_;
  LabelSet labels_;
};

}  // namespace acd
