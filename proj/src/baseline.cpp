#include "acd/baseline.hpp"

#include <algorithm>
#include <cmath>

namespace acd {

void BaselineHyper::validate() const {
  if (learning_rate <= 0.0) throw ValidationError("learning_rate must be > 0");
  if (l2 < 0.0) throw ValidationError("l2 must be >= 0");
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (patience < 1) throw ValidationError("patience must be >= 1");
  if (ha_rounds < 1) throw ValidationError("ha_rounds must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
}

namespace {

Eigen::VectorXd class_probabilities(const Eigen::MatrixXd& weights,
                                    const Eigen::VectorXd& bias, const StateVector& x) {
  Eigen::VectorXd z = weights * x + bias;
  const double zmax = z.maxCoeff();
  Eigen::VectorXd p = (z.array() - zmax).exp();
  return p / p.sum();
}

}  // namespace

double softmax_objective(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                         const std::vector<StateVector>& xs, const std::vector<int>& ys,
                         double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Eigen::VectorXd z = weights * xs[i] + bias;
    const double zmax = z.maxCoeff();
    const double log_norm = zmax + std::log((z.array() - zmax).exp().sum());
    loss += log_norm - z[ys[i]];
  }
  loss /= static_cast<double>(xs.size());
  return loss + 0.5 * l2 * weights.squaredNorm();
}

void softmax_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                      const std::vector<StateVector>& xs, const std::vector<int>& ys,
                      double l2, Eigen::MatrixXd& grad_w, Eigen::VectorXd& grad_b) {
  grad_w = Eigen::MatrixXd::Zero(weights.rows(), weights.cols());
  grad_b = Eigen::VectorXd::Zero(bias.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Eigen::VectorXd p = class_probabilities(weights, bias, xs[i]);
    p[ys[i]] -= 1.0;
    grad_w.noalias() += p * xs[i].transpose();
    grad_b += p;
  }
  grad_w /= static_cast<double>(xs.size());
  grad_b /= static_cast<double>(xs.size());
  grad_w += l2 * weights;
}

TrainingVectors build_training_vectors(const Corpus& corpus, int ha_rounds,
                                       const FeatureConfig& fcfg, const HAConfig& hcfg) {
  const Featurizer featurizer(fcfg, hcfg, corpus.labels);

  // HA-free representations are round-invariant, so one view per clause.
  const int rounds = hcfg.n_l + hcfg.n_c == 0 ? 1 : ha_rounds;

  TrainingVectors tv;
  for (const auto& doc : corpus.documents) {
    const int len = static_cast<int>(doc.clauses.size());
    std::vector<std::optional<int>> gold(len);
    for (int i = 0; i < len; ++i) {
      if (!doc.clauses[i].gold_label)
        throw ValidationError("training clause without gold label in document " + doc.id);
      gold[i] = doc.clauses[i].gold_label;
    }
    for (int round = 0; round < rounds; ++round) {
      AnnotationHistory history;
      history.last_round.assign(len, std::nullopt);
      if (round > 0) history.last_round = gold;  // teacher forcing
      for (int pos = 0; pos < len; ++pos) {
        tv.xs.push_back(featurizer.state(doc, pos, history));
        tv.ys.push_back(*gold[pos]);
        history.current_round.push_back(round > 0 ? gold[pos] : std::nullopt);
      }
    }
  }
  return tv;
}

BaselineTrainResult train_baseline(const Corpus& corpus, const BaselineHyper& hyper,
                                   const FeatureConfig& fcfg, const HAConfig& hcfg) {
  hyper.validate();
  if (corpus.documents.empty()) throw ValidationError("cannot train on an empty corpus");

  const Featurizer featurizer(fcfg, hcfg, corpus.labels);
  const int num_labels = featurizer.num_labels();
  auto [xs, ys] = build_training_vectors(corpus, hyper.ha_rounds, fcfg, hcfg);

  BaselineTrainResult result;
  result.model.labels = corpus.labels;
  result.model.fcfg = fcfg;
  result.model.hcfg = hcfg;
  result.model.weights = Eigen::MatrixXd::Zero(num_labels, featurizer.dim());
  result.model.bias = Eigen::VectorXd::Zero(num_labels);

  {
    std::vector<bool> present(num_labels, false);
    for (int y : ys) present[y] = true;
    const auto distinct = std::count(present.begin(), present.end(), true);
    if (distinct < 2)
      result.info.warnings.push_back("degenerate corpus: training data has a single class");
  }

  Rng rng(derive_seed(hyper.seed, "baseline-shuffle"));
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto& model = result.model;
  double lr = hyper.learning_rate;
  double previous_loss = softmax_objective(model.weights, model.bias, xs, ys, hyper.l2);
  double best_loss = previous_loss;
  int stale_epochs = 0;
  Eigen::MatrixXd grad_w;
  Eigen::VectorXd grad_b;
  std::vector<StateVector> batch_x;
  std::vector<int> batch_y;

  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t stop = std::min(order.size(), start + hyper.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t i = start; i < stop; ++i) {
        batch_x.push_back(xs[order[i]]);
        batch_y.push_back(ys[order[i]]);
      }
      softmax_gradient(model.weights, model.bias, batch_x, batch_y, hyper.l2, grad_w,
                       grad_b);
      model.weights -= lr * grad_w;
      model.bias -= lr * grad_b;
    }

    const double loss = softmax_objective(model.weights, model.bias, xs, ys, hyper.l2);
    result.info.epoch_loss.push_back(loss);
    if (loss > previous_loss + 1e-9) {
      lr *= 0.5;
      ++result.info.lr_halvings;
    }
    previous_loss = loss;
    if (loss < best_loss - 1e-12) {
      best_loss = loss;
      stale_epochs = 0;
    } else if (++stale_epochs >= hyper.patience) {
      break;
    }
  }
  return result;
}

int predict(const LinearClassifier& classifier, const StateVector& state) {
  Eigen::VectorXd scores = classifier.weights * state + classifier.bias;
  int best = 0;
  for (int a = 1; a < scores.size(); ++a) {
    if (scores[a] > scores[best]) best = a;
  }
  return best;
}

AnnotationRule as_policy(const LinearClassifier& classifier) {
  LinearClassifier copy = classifier;
  return AnnotationRule(classifier.fcfg, classifier.hcfg, classifier.labels,
                        [copy = std::move(copy)](const StateVector& s) {
                          return predict(copy, s);
                        });
}

}  // namespace acd
