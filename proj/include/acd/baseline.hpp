#pragma once

#include "acd/inference.hpp"

namespace acd {

// Flat linear classifier playing the supervised-comparator role; trained
// with or without HA-augmented features and evaluated through the same
// multi-round inference loop as the RL policy.
struct LinearClassifier {
  Eigen::MatrixXd weights;  // |A| x N
  Eigen::VectorXd bias;     // |A|
  LabelSet labels;
  FeatureConfig fcfg;
  HAConfig hcfg;

  int num_labels() const { return labels.size(); }
  int state_dim() const { return state_dim_of(); }
  int state_dim_of() const { return acd::state_dim(fcfg, hcfg, labels.size()); }
};

struct BaselineHyper {
  double learning_rate = 0.1;
  double l2 = 1e-4;
  int max_epochs = 200;
  int patience = 10;   // epochs without full-batch improvement before stopping
  int ha_rounds = 2;   // K_b vector representations per clause
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BaselineTrainInfo {
  std::vector<double> epoch_loss;  // full-batch objective after each epoch
  int lr_halvings = 0;
  std::vector<std::string> warnings;
};

struct BaselineTrainResult {
  LinearClassifier model;
  BaselineTrainInfo info;
};

// Multinomial logistic objective with L2 penalty on the weights:
//   mean cross-entropy + (l2/2) * ||W||_F^2
// Exposed so the analytic gradient can be checked against finite
// differences.
double softmax_objective(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                         const std::vector<StateVector>& xs, const std::vector<int>& ys,
                         double l2);
void softmax_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                      const std::vector<StateVector>& xs, const std::vector<int>& ys,
                      double l2, Eigen::MatrixXd& grad_w, Eigen::VectorXd& grad_b);

// The K_b teacher-forced vector views per clause: round 1 with empty HA
// slots, later rounds with gold labels in the slots. HA-free configurations
// collapse to a single round, since their views are round-invariant.
struct TrainingVectors {
  std::vector<StateVector> xs;
  std::vector<int> ys;
};
TrainingVectors build_training_vectors(const Corpus& corpus, int ha_rounds,
                                       const FeatureConfig& fcfg, const HAConfig& hcfg);

// Fits the softmax objective on build_training_vectors output by
// deterministic seeded mini-batch gradient descent.
BaselineTrainResult train_baseline(const Corpus& corpus, const BaselineHyper& hyper,
                                   const FeatureConfig& fcfg, const HAConfig& hcfg);

// argmax of class scores w_a . x + b_a; ties go to the lowest label index.
int predict(const LinearClassifier& classifier, const StateVector& state);

// Adapts the classifier to the shared inference loop.
AnnotationRule as_policy(const LinearClassifier& classifier);

}  // namespace acd
