#pragma once

// Test-only tabular MDP machinery: deterministic random instances, one-hot
// sample construction, and an exact dynamic-programming oracle that stays
// independent of the LSTDQ implementation it checks.

#include <optional>
#include <vector>

#include "acd/lspi.hpp"

namespace acd::testsupport {

struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::vector<int>> next;       // [s][a], -1 marks a terminal move
  std::vector<std::vector<double>> reward;  // [s][a]
};

inline TabularMdp random_mdp(Rng& rng, int max_states, int max_actions,
                             double terminal_prob) {
  TabularMdp mdp;
  mdp.num_states = 2 + static_cast<int>(rng.below(max_states - 1));
  mdp.num_actions = 2 + static_cast<int>(rng.below(max_actions - 1));
  mdp.next.assign(mdp.num_states, std::vector<int>(mdp.num_actions, -1));
  mdp.reward.assign(mdp.num_states, std::vector<double>(mdp.num_actions, 0.0));
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      mdp.next[s][a] = rng.uniform() < terminal_prob
                           ? -1
                           : static_cast<int>(rng.below(mdp.num_states));
      mdp.reward[s][a] = 2.0 * rng.uniform() - 1.0;
    }
  }
  return mdp;
}

// one sample per (state, action), with one-hot state features
inline SampleStore exhaustive_samples(const TabularMdp& mdp) {
  SampleStore store;
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      Sample sample;
      sample.state = StateVector::Zero(mdp.num_states);
      sample.state[s] = 1.0;
      sample.action = a;
      sample.reward = mdp.reward[s][a];
      if (mdp.next[s][a] >= 0) {
        StateVector ns = StateVector::Zero(mdp.num_states);
        ns[mdp.next[s][a]] = 1.0;
        sample.next_state = ns;
      }
      store.add(sample);
    }
  }
  return store;
}

// Q-values of a fixed policy by Bellman backup iteration.
inline std::vector<std::vector<double>> evaluate_policy(const TabularMdp& mdp,
                                                        const std::vector<int>& policy,
                                                        double gamma) {
  std::vector<std::vector<double>> q(mdp.num_states,
                                     std::vector<double>(mdp.num_actions, 0.0));
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double delta = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
      for (int a = 0; a < mdp.num_actions; ++a) {
        const int ns = mdp.next[s][a];
        const double fresh =
            mdp.reward[s][a] + (ns >= 0 ? gamma * q[ns][policy[ns]] : 0.0);
        delta = std::max(delta, std::abs(fresh - q[s][a]));
        q[s][a] = fresh;
      }
    }
    if (delta < 1e-14) break;
  }
  return q;
}

struct ExactSolution {
  std::vector<int> policy;
  std::vector<std::vector<double>> q;
};

// Exact policy iteration with lowest-index tie-breaking.
inline ExactSolution exact_policy_iteration(const TabularMdp& mdp, double gamma) {
  ExactSolution sol;
  sol.policy.assign(mdp.num_states, 0);
  for (int round = 0; round < 200; ++round) {
    sol.q = evaluate_policy(mdp, sol.policy, gamma);
    bool stable = true;
    for (int s = 0; s < mdp.num_states; ++s) {
      int best = 0;
      for (int a = 1; a < mdp.num_actions; ++a) {
        if (sol.q[s][a] > sol.q[s][best]) best = a;
      }
      if (best != sol.policy[s]) {
        sol.policy[s] = best;
        stable = false;
      }
    }
    if (stable) break;
  }
  return sol;
}

// LSPI on the exhaustive sample set: iterate LSTDQ to the weight fixed point.
inline Eigen::VectorXd lspi_to_convergence(const SampleStore& samples, int num_states,
                                           int num_actions, double gamma, double ridge,
                                           int max_iterations = 100,
                                           double tolerance = 1e-12) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(num_states) * num_actions);
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd next = lstdq(samples, w, num_states, num_actions, gamma, ridge);
    const double delta = (next - w).lpNorm<Eigen::Infinity>();
    w = next;
    if (delta < tolerance) break;
  }
  return w;
}

}  // namespace acd::testsupport
