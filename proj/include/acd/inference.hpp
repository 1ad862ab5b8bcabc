#pragma once

#include <functional>

#include "acd/lspi.hpp"

namespace acd {

// A deterministic state -> label decision rule bound to its featurization,
// so RL policies and supervised classifiers run through the same test loop.
class AnnotationRule {
 public:
  AnnotationRule(FeatureConfig fcfg, HAConfig hcfg, LabelSet labels,
                 std::function<int(const StateVector&)> act)
      : featurizer_(std::move(fcfg), hcfg, std::move(labels)), act_(std::move(act)) {}

  const Featurizer& featurizer() const { return featurizer_; }
  int act(const StateVector& state) const { return act_(state); }

 private:
  Featurizer featurizer_;
  std::function<int(const StateVector&)> act_;
};

AnnotationRule as_rule(const Policy& policy);

struct AnnotationResult {
  std::vector<int> annotations;  // one label per clause
  int rounds_used = 0;
  bool converged = false;
};

// Multi-round annotation: each round labels the document left to right with
// type-C slots fed by the round's own outputs and type-L slots by the
// previous round's list; stops as soon as a round reproduces the previous
// list, else returns round J's list.
AnnotationResult annotate_document(const AnnotationRule& rule, const Document& doc,
                                   int rounds_budget);
AnnotationResult annotate_document(const Policy& policy, const Document& doc,
                                   int rounds_budget);

std::vector<AnnotationResult> annotate_corpus(const AnnotationRule& rule,
                                              const Corpus& corpus, int rounds_budget,
                                              int jobs = 1);

}  // namespace acd
