#include "acd/lspi.hpp"

#include <cmath>

namespace acd {

void LspiConfig::validate() const {
  if (gamma < 0.0 || gamma > 1.0) throw ValidationError("gamma must lie in [0, 1]");
  if (episodes < 0) throw ValidationError("episodes must be >= 0");
  if (ridge <= 0.0) throw ValidationError("ridge must be > 0");
  if (max_policy_iterations < 1) throw ValidationError("max_policy_iterations must be >= 1");
  if (epsilon0 < 0.0 || epsilon0 > 1.0 || epsilon_floor < 0.0 || epsilon_floor > 1.0 ||
      epsilon_decay < 0.0 || epsilon_decay > 1.0)
    throw ValidationError("epsilon schedule values must lie in [0, 1]");
}

int greedy_action(const Eigen::VectorXd& weights, const StateVector& state,
                  int num_labels) {
  const auto n = state.size();
  int best = 0;
  double best_score = weights.segment(0, n).dot(state);
  for (int a = 1; a < num_labels; ++a) {
    const double score = weights.segment(a * n, n).dot(state);
    if (score > best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

int greedy_action(const Policy& policy, const StateVector& state) {
  return greedy_action(policy.weights, state, policy.num_labels());
}

Eigen::VectorXd lstdq(const SampleStore& samples, const Eigen::VectorXd& policy_weights,
                      int state_dim, int num_labels, double gamma, double ridge) {
  if (ridge <= 0.0) throw ValidationError("ridge must be > 0");
  LstdqSystem system(state_dim, num_labels, gamma, ridge);
  for (const auto& sample : samples) system.add_sample(sample, policy_weights);
  return system.solve();
}

Eigen::VectorXd lstdq(const SampleStore& samples, const Policy& policy, double gamma,
                      double ridge) {
  return lstdq(samples, policy.weights, policy.state_dim(), policy.num_labels(), gamma,
               ridge);
}

LstdqSystem::LstdqSystem(int state_dim, int num_labels, double gamma, double ridge)
    : n_(state_dim),
      a_(num_labels),
      gamma_(gamma),
      ridge_(ridge),
      system_(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(state_dim) * num_labels,
                                        static_cast<Eigen::Index>(state_dim) * num_labels) *
              ridge),
      rhs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(state_dim) * num_labels)) {}

void LstdqSystem::add_sample(const Sample& sample, const Eigen::VectorXd& policy_weights) {
  if (!sample.state.allFinite() || !std::isfinite(sample.reward) ||
      (sample.next_state && !sample.next_state->allFinite()))
    throw std::invalid_argument("lstdq: non-finite sample");
  if (sample.state.size() != n_)
    throw std::invalid_argument("lstdq: sample state dimension mismatch");

  const int a = sample.action;
  system_.block(a * n_, a * n_, n_, n_).noalias() +=
      sample.state * sample.state.transpose();
  rhs_.segment(a * n_, n_) += sample.reward * sample.state;

  int next_action = -1;
  if (!sample.terminal()) {
    next_action = greedy_action(policy_weights, *sample.next_state, a_);
    system_.block(a * n_, next_action * n_, n_, n_).noalias() -=
        gamma_ * (sample.state * sample.next_state->transpose());
  }
  states_.push_back(sample.state);
  actions_.push_back(a);
  next_states_.push_back(sample.terminal() ? StateVector() : *sample.next_state);
  next_actions_.push_back(next_action);
}

std::size_t LstdqSystem::refresh_next_actions(const Eigen::VectorXd& policy_weights) {
  std::size_t changed = 0;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (next_actions_[i] < 0) continue;  // terminal
    const int fresh = greedy_action(policy_weights, next_states_[i], a_);
    if (fresh == next_actions_[i]) continue;
    const int a = actions_[i];
    const auto cross = gamma_ * (states_[i] * next_states_[i].transpose());
    system_.block(a * n_, next_actions_[i] * n_, n_, n_).noalias() += cross;
    system_.block(a * n_, fresh * n_, n_, n_).noalias() -= cross;
    next_actions_[i] = fresh;
    ++changed;
  }
  return changed;
}

Eigen::VectorXd LstdqSystem::solve() const {
  Eigen::VectorXd w = system_.partialPivLu().solve(rhs_);
  if (!w.allFinite()) throw std::runtime_error("lstdq: solver produced non-finite weights");
  return w;
}

Policy train(const Corpus& corpus, const LspiConfig& cfg, const FeatureConfig& fcfg,
             const HAConfig& hcfg) {
  cfg.validate();
  if (corpus.documents.empty()) throw ValidationError("cannot train on an empty corpus");
  for (const auto& doc : corpus.documents) {
    for (std::size_t i = 0; i < doc.clauses.size(); ++i) {
      if (!doc.clauses[i].gold_label)
        throw ValidationError("training clause without gold label in document " + doc.id);
    }
  }

  const Featurizer featurizer(fcfg, hcfg, corpus.labels);
  const int num_labels = featurizer.num_labels();
  const int n = featurizer.dim();

  Eigen::VectorXd weights =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * num_labels);
  LstdqSystem system(n, num_labels, cfg.gamma, cfg.ridge);
  Rng rng(derive_seed(cfg.seed, "explore"));
  std::vector<Sample> episode_samples;

  for (const auto& doc : corpus.documents) {
    std::vector<std::optional<int>> last_round(doc.clauses.size());
    for (int episode = 0; episode < cfg.episodes; ++episode) {
      const double epsilon =
          std::max(cfg.epsilon_floor, cfg.epsilon0 * std::pow(cfg.epsilon_decay, episode));

      AnnotationEnv env(doc, last_round, featurizer);
      episode_samples.clear();
      auto pick = [&](const StateVector& s) {
        if (rng.uniform() < epsilon) return static_cast<int>(rng.below(num_labels));
        return greedy_action(weights, s, num_labels);
      };
      const auto produced = run_episode(env, pick, episode_samples);
      last_round.assign(produced.begin(), produced.end());

      for (auto& sample : episode_samples) system.add_sample(sample, weights);

      // policy iteration over all accumulated samples
      for (int it = 0; it < cfg.max_policy_iterations; ++it) {
        Eigen::VectorXd next = system.solve();
        system.refresh_next_actions(next);
        const double delta = (next - weights).lpNorm<Eigen::Infinity>();
        weights = std::move(next);
        if (delta < cfg.policy_tolerance) break;
      }
    }
  }

  return Policy{std::move(weights), corpus.labels, fcfg, hcfg};
}

}  // namespace acd
