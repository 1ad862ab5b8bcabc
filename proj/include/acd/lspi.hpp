#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "acd/mdp.hpp"

namespace acd {

// Linear Q-function policy: Q(s, a) = w . phi(s, a) with the block basis of
// state_action_vector. Immutable once returned from training.
struct Policy {
  Eigen::VectorXd weights;  // length N * |A|
  LabelSet labels;
  FeatureConfig fcfg;
  HAConfig hcfg;

  int num_labels() const { return labels.size(); }
  int state_dim() const { return state_dim_of(fcfg, hcfg, labels.size()); }

  static int state_dim_of(const FeatureConfig& f, const HAConfig& h, int a) {
    return acd::state_dim(f, h, a);
  }
};

struct LspiConfig {
  double gamma = 0.9;
  int episodes = 10;        // K rounds per training document
  double ridge = 1e-6;      // delta-regularisation of the LSTDQ system
  double policy_tolerance = 1e-6;  // L-inf weight change at the fixed point
  int max_policy_iterations = 30;
  double epsilon0 = 0.3;    // exploration schedule, per-document episode index
  double epsilon_decay = 0.9;
  double epsilon_floor = 0.02;
  std::uint64_t seed = 0;

  void validate() const;
};

// argmax_a w . phi(state, a); ties go to the lowest label index.
int greedy_action(const Eigen::VectorXd& weights, const StateVector& state,
                  int num_labels);
int greedy_action(const Policy& policy, const StateVector& state);

// Append-only transition store with stable iteration order.
class SampleStore {
 public:
  void add(Sample sample) { samples_.push_back(std::move(sample)); }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

 private:
  std::vector<Sample> samples_;
};

// One LSTDQ evaluation step: solves
//   (ridge * I + sum_i phi_i (phi_i - gamma phi'_i)^T) w = sum_i phi_i r_i
// where phi'_i uses the greedy action of `policy_weights` on the next state
// and is zero for terminal samples. Dense direct solve.
Eigen::VectorXd lstdq(const SampleStore& samples, const Eigen::VectorXd& policy_weights,
                      int state_dim, int num_labels, double gamma, double ridge);
Eigen::VectorXd lstdq(const SampleStore& samples, const Policy& policy, double gamma,
                      double ridge);

// Incremental form of the LSTDQ system used inside the training loop. The
// policy-independent parts accumulate once per sample; the policy-coupled
// cross term is patched only where the greedy next-action changed.
class LstdqSystem {
 public:
  LstdqSystem(int state_dim, int num_labels, double gamma, double ridge);

  void add_sample(const Sample& sample, const Eigen::VectorXd& policy_weights);

  // Re-derives greedy next-actions under `policy_weights`; returns how many
  // samples changed.
  std::size_t refresh_next_actions(const Eigen::VectorXd& policy_weights);

  Eigen::VectorXd solve() const;

  std::size_t size() const { return states_.size(); }

 private:
  int n_, a_;
  double gamma_, ridge_;
  Eigen::MatrixXd system_;  // ridge*I + sum phi phi^T - gamma * sum phi phi'^T
  Eigen::VectorXd rhs_;
  std::vector<StateVector> states_;       // phi state parts
  std::vector<int> actions_;
  std::vector<StateVector> next_states_;  // empty vector marks terminal
  std::vector<int> next_actions_;         // -1 for terminal
};

// Alg. training loop: per document, K epsilon-greedy episodes whose type-L
// history is the previous episode's annotation of that document; samples
// accumulate globally and the weights are re-solved to a policy fixed point
// after every episode.
Policy train(const Corpus& corpus, const LspiConfig& cfg, const FeatureConfig& fcfg,
             const HAConfig& hcfg);

}  // namespace acd
