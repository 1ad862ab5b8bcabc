#pragma once

#include <optional>
#include <vector>

#include "acd/features.hpp"

namespace acd {

// One MDP transition: acting on a clause's state, the reward received, and
// the next clause's state (nullopt when the acted-on clause was the last).
struct Sample {
  StateVector state;
  int action = 0;
  double reward = 0.0;
  std::optional<StateVector> next_state;

  bool terminal() const { return !next_state.has_value(); }
};

// Episodic annotation environment over one document: the cursor walks the
// clauses left to right regardless of the actions taken; only the next
// state's HA content depends on them.
class AnnotationEnv {
 public:
  struct StepResult {
    double reward = 0.0;
    std::optional<StateVector> next;  // nullopt == terminal
  };

  // last_round must carry one entry per clause (nullopt where unannotated).
  AnnotationEnv(const Document& doc, std::vector<std::optional<int>> last_round,
                const Featurizer& featurizer, double reward_pos = 1.0,
                double reward_neg = -1.0, bool gold_available = true);

  const StateVector& state() const;
  bool done() const { return position_ >= static_cast<int>(doc_->clauses.size()); }
  int position() const { return position_; }

  // Gold-matching reward; requires gold labels on the document.
  StepResult step(int action);

  // Inference mode: advances without touching gold labels.
  std::optional<StateVector> step_unrewarded(int action);

  // Labels assigned so far in this round, one per visited clause.
  const std::vector<int>& actions_taken() const { return actions_; }

 private:
  std::optional<StateVector> advance(int action);

  const Document* doc_;
  const Featurizer* featurizer_;
  AnnotationHistory history_;
  std::vector<int> actions_;
  StateVector current_state_;
  int position_ = 0;
  double reward_pos_;
  double reward_neg_;
  bool gold_available_;
};

// Runs one full episode under an action callback and appends the emitted
// samples; returns the labels assigned during the round.
std::vector<int> run_episode(AnnotationEnv& env,
                             const std::function<int(const StateVector&)>& pick_action,
                             std::vector<Sample>& out);

}  // namespace acd
