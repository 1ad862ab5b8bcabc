#include "acd/mdp.hpp"

namespace acd {

AnnotationEnv::AnnotationEnv(const Document& doc,
                             std::vector<std::optional<int>> last_round,
                             const Featurizer& featurizer, double reward_pos,
                             double reward_neg, bool gold_available)
    : doc_(&doc),
      featurizer_(&featurizer),
      reward_pos_(reward_pos),
      reward_neg_(reward_neg),
      gold_available_(gold_available) {
  if (doc.clauses.empty()) throw ValidationError("cannot annotate an empty document");
  if (last_round.size() != doc.clauses.size())
    throw ValidationError("last_round must have one entry per clause");
  history_.last_round = std::move(last_round);
  history_.current_round.clear();
  current_state_ = featurizer_->state(*doc_, 0, history_);
}

const StateVector& AnnotationEnv::state() const {
  if (done()) throw std::logic_error("state() after terminal");
  return current_state_;
}

std::optional<StateVector> AnnotationEnv::advance(int action) {
  if (done()) throw std::logic_error("step after terminal");
  if (action < 0 || action >= featurizer_->num_labels())
    throw std::out_of_range("action outside label set");
  history_.current_round.emplace_back(action);
  actions_.push_back(action);
  ++position_;
  if (done()) return std::nullopt;
  current_state_ = featurizer_->state(*doc_, position_, history_);
  return current_state_;
}

AnnotationEnv::StepResult AnnotationEnv::step(int action) {
  if (done()) throw std::logic_error("step after terminal");
  if (!gold_available_)
    throw std::logic_error("step() demands a reward but the environment has no gold labels");
  const auto& gold = doc_->clauses[position_].gold_label;
  if (!gold) throw ValidationError("clause " + std::to_string(position_) + " of document " +
                                   doc_->id + " has no gold label");
  StepResult result;
  result.reward = action == *gold ? reward_pos_ : reward_neg_;
  result.next = advance(action);
  return result;
}

std::optional<StateVector> AnnotationEnv::step_unrewarded(int action) {
  return advance(action);
}

std::vector<int> run_episode(AnnotationEnv& env,
                             const std::function<int(const StateVector&)>& pick_action,
                             std::vector<Sample>& out) {
  while (!env.done()) {
    Sample sample;
    sample.state = env.state();
    sample.action = pick_action(sample.state);
    auto result = env.step(sample.action);
    sample.reward = result.reward;
    sample.next_state = std::move(result.next);
    out.push_back(std::move(sample));
  }
  return env.actions_taken();
}

}  // namespace acd
