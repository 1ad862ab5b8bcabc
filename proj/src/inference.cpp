#include "acd/inference.hpp"

namespace acd {

AnnotationRule as_rule(const Policy& policy) {
  const int num_labels = policy.num_labels();
  Eigen::VectorXd weights = policy.weights;
  return AnnotationRule(policy.fcfg, policy.hcfg, policy.labels,
                        [weights = std::move(weights), num_labels](const StateVector& s) {
                          return greedy_action(weights, s, num_labels);
                        });
}

AnnotationResult annotate_document(const AnnotationRule& rule, const Document& doc,
                                   int rounds_budget) {
  if (rounds_budget < 1) throw ValidationError("rounds budget must be >= 1");
  if (doc.clauses.empty()) throw ValidationError("cannot annotate an empty document");

  const auto& featurizer = rule.featurizer();
  const int len = static_cast<int>(doc.clauses.size());

  AnnotationResult result;
  std::vector<std::optional<int>> last_round(len);
  std::vector<int> previous;
  for (int round = 1; round <= rounds_budget; ++round) {
    AnnotationHistory history;
    history.last_round = last_round;
    std::vector<int> current;
    current.reserve(len);
    for (int pos = 0; pos < len; ++pos) {
      const int label = rule.act(featurizer.state(doc, pos, history));
      current.push_back(label);
      history.current_round.emplace_back(label);
    }
    result.rounds_used = round;
    if (round > 1 && current == previous) {
      result.annotations = std::move(current);
      result.converged = true;
      return result;
    }
    last_round.assign(current.begin(), current.end());
    previous = std::move(current);
  }
  result.annotations = std::move(previous);
  result.converged = false;
  return result;
}

AnnotationResult annotate_document(const Policy& policy, const Document& doc,
                                   int rounds_budget) {
  return annotate_document(as_rule(policy), doc, rounds_budget);
}

std::vector<AnnotationResult> annotate_corpus(const AnnotationRule& rule,
                                              const Corpus& corpus, int rounds_budget,
                                              int jobs) {
  std::vector<AnnotationResult> results(corpus.documents.size());
  parallel_for(corpus.documents.size(), jobs, [&](std::size_t i) {
    results[i] = annotate_document(rule, corpus.documents[i], rounds_budget);
  });
  return results;
}

}  // namespace acd
