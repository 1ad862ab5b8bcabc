#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "acd/lspi.hpp"
#include "support/tabular_oracle.hpp"

using namespace acd;
using namespace acd::testsupport;

TEST_CASE("greedy_action breaks ties toward the lowest label index") {
  StateVector s(2);
  s << 1.0, 2.0;

  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(8);
  CHECK(greedy_action(zeros, s, 4) == 0);

  // exact tie between actions 1 and 3
  Eigen::VectorXd tied = Eigen::VectorXd::Zero(8);
  tied.segment(2, 2) << 1.0, 1.0;
  tied.segment(6, 2) << 1.0, 1.0;
  CHECK(greedy_action(tied, s, 4) == 1);
}

TEST_CASE("greedy_action picks the only positively scoring block") {
  StateVector s(3);
  s << 0.5, 1.0, 2.0;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(9);
  w.segment(6, 3) << 1.0, 1.0, 1.0;  // block 2
  CHECK(greedy_action(w, s, 3) == 2);  // blocks 0 and 1 score 0, block 2 scores 3.5
}

TEST_CASE("greedy_action is invariant under positive weight scaling") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const int a = 2 + static_cast<int>(rng.below(3));
    Eigen::VectorXd w(n * a);
    StateVector s(n);
    for (int i = 0; i < w.size(); ++i) w[i] = rng.uniform() - 0.5;
    for (int i = 0; i < n; ++i) s[i] = rng.uniform() - 0.5;
    const int base = greedy_action(w, s, a);
    CHECK(greedy_action((3.7 * w).eval(), s, a) == base);
    CHECK(greedy_action((0.01 * w).eval(), s, a) == base);
  }
}

TEST_CASE("lstdq on an empty store returns zero weights") {
  const SampleStore empty;
  const Eigen::VectorXd w =
      lstdq(empty, Eigen::VectorXd::Zero(6), 3, 2, 0.9, 1e-6);
  CHECK(w.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lstdq solves the rank-one terminal system in closed form") {
  // single terminal sample with phi = e_i, r = 1:
  // (delta I + e_i e_i^T) w = e_i  =>  w_i = 1 / (1 + delta)
  const double delta = 1e-6;
  const int n = 4, a = 2;
  Sample sample;
  sample.state = StateVector::Zero(n);
  sample.state[2] = 1.0;
  sample.action = 1;
  sample.reward = 1.0;
  SampleStore store;
  store.add(sample);

  const Eigen::VectorXd w =
      lstdq(store, Eigen::VectorXd::Zero(n * a), n, a, 0.9, delta);
  const int index = 1 * n + 2;
  CHECK(w[index] == doctest::Approx(1.0 / (1.0 + delta)).epsilon(1e-12));
  for (int i = 0; i < w.size(); ++i) {
    if (i != index) CHECK(w[i] == 0.0);
  }
}

TEST_CASE("lstdq matches exact policy evaluation on a two-state MDP") {
  TabularMdp mdp;
  mdp.num_states = 2;
  mdp.num_actions = 2;
  mdp.next = {{1, -1}, {0, 1}};
  mdp.reward = {{1.0, 0.5}, {-0.3, 0.8}};
  const double gamma = 0.5;

  // policy weights whose greedy action is 0 in every state
  Eigen::VectorXd policy_weights = Eigen::VectorXd::Zero(4);
  policy_weights.segment(0, 2) << 1.0, 1.0;

  const SampleStore samples = exhaustive_samples(mdp);
  const Eigen::VectorXd w = lstdq(samples, policy_weights, 2, 2, gamma, 1e-9);

  const auto oracle = evaluate_policy(mdp, {0, 0}, gamma);
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a)
      CHECK(w[a * 2 + s] == doctest::Approx(oracle[s][a]).epsilon(1e-6));
  }
  // hand value: V(0) solves V = 1 + 0.5 * (-0.3 + 0.5 V)
  CHECK(w[0] == doctest::Approx(17.0 / 15.0).epsilon(1e-6));
}

TEST_CASE("LSPI fixed point agrees with exact policy iteration on random MDPs") {
  Rng rng(404);
  for (int instance = 0; instance < 20; ++instance) {
    const TabularMdp mdp = random_mdp(rng, 6, 3, 0.2);
    for (const double gamma : {0.0, 0.9}) {
      const SampleStore samples = exhaustive_samples(mdp);
      const Eigen::VectorXd w =
          lspi_to_convergence(samples, mdp.num_states, mdp.num_actions, gamma, 1e-9);
      const ExactSolution exact = exact_policy_iteration(mdp, gamma);
      for (int s = 0; s < mdp.num_states; ++s) {
        StateVector e = StateVector::Zero(mdp.num_states);
        e[s] = 1.0;
        CHECK(greedy_action(w, e, mdp.num_actions) == exact.policy[s]);
        for (int a = 0; a < mdp.num_actions; ++a)
          CHECK(w[a * mdp.num_states + s] ==
                doctest::Approx(exact.q[s][a]).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("at the weight fixed point one more lstdq keeps every greedy action") {
  Rng rng(77);
  for (int instance = 0; instance < 10; ++instance) {
    const TabularMdp mdp = random_mdp(rng, 5, 3, 0.25);
    const SampleStore samples = exhaustive_samples(mdp);
    const Eigen::VectorXd w =
        lspi_to_convergence(samples, mdp.num_states, mdp.num_actions, 0.9, 1e-9);
    const Eigen::VectorXd w2 =
        lstdq(samples, w, mdp.num_states, mdp.num_actions, 0.9, 1e-9);
    for (int s = 0; s < mdp.num_states; ++s) {
      StateVector e = StateVector::Zero(mdp.num_states);
      e[s] = 1.0;
      CHECK(greedy_action(w, e, mdp.num_actions) ==
            greedy_action(w2, e, mdp.num_actions));
    }
  }
}

TEST_CASE("the incremental system matches the batch lstdq solve") {
  Rng rng(55);
  const TabularMdp mdp = random_mdp(rng, 6, 3, 0.2);
  const SampleStore samples = exhaustive_samples(mdp);

  Eigen::VectorXd policy_weights(mdp.num_states * mdp.num_actions);
  for (int i = 0; i < policy_weights.size(); ++i) policy_weights[i] = rng.uniform() - 0.5;

  const Eigen::VectorXd batch =
      lstdq(samples, policy_weights, mdp.num_states, mdp.num_actions, 0.9, 1e-8);

  LstdqSystem system(mdp.num_states, mdp.num_actions, 0.9, 1e-8);
  for (const auto& sample : samples) system.add_sample(sample, policy_weights);
  const Eigen::VectorXd incremental = system.solve();
  CHECK((batch - incremental).lpNorm<Eigen::Infinity>() < 1e-9);

  // patching to a different policy equals rebuilding under that policy
  Eigen::VectorXd other = -policy_weights;
  system.refresh_next_actions(other);
  const Eigen::VectorXd patched = system.solve();
  const Eigen::VectorXd rebuilt =
      lstdq(samples, other, mdp.num_states, mdp.num_actions, 0.9, 1e-8);
  CHECK((patched - rebuilt).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("lstdq rejects non-finite samples") {
  Sample bad;
  bad.state = StateVector::Constant(2, std::numeric_limits<double>::quiet_NaN());
  bad.action = 0;
  bad.reward = 1.0;
  SampleStore store;
  LstdqSystem system(2, 2, 0.9, 1e-6);
  CHECK_THROWS_AS(system.add_sample(bad, Eigen::VectorXd::Zero(4)),
                  std::invalid_argument);
}

namespace {

Corpus tiny_training_corpus() {
  SynthConfig cfg;
  cfg.labels = {"pos", "neg"};
  cfg.num_documents = 4;
  cfg.clauses_per_doc = {3, 5};
  cfg.label_transition = {{0.2, 0.8}, {0.8, 0.2}};
  cfg.initial_label_dist = {0.5, 0.5};
  cfg.vocabulary = {"good", "nice", "bad", "poor", "meh"};
  cfg.vocab_per_label = {{0.5, 0.5, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.5, 0.5, 0.0}};
  cfg.tokens_per_clause = {2, 4};
  cfg.lexical_ambiguity = 0.2;
  return generate_synthetic(cfg, 8);
}

}  // namespace

TEST_CASE("train with zero episodes returns the zero policy") {
  const Corpus corpus = tiny_training_corpus();
  FeatureConfig fcfg;
  fcfg.hash_dim = 16;
  HAConfig hcfg;
  LspiConfig cfg;
  cfg.episodes = 0;
  const Policy policy = train(corpus, cfg, fcfg, hcfg);
  CHECK(policy.weights.size() == policy.state_dim() * 2);
  CHECK(policy.weights.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("train is deterministic in (corpus, configs, seed)") {
  const Corpus corpus = tiny_training_corpus();
  FeatureConfig fcfg;
  fcfg.hash_dim = 16;
  HAConfig hcfg;
  hcfg.n_l = 1;
  hcfg.n_c = 1;
  LspiConfig cfg;
  cfg.episodes = 3;
  cfg.seed = 99;
  const Policy a = train(corpus, cfg, fcfg, hcfg);
  const Policy b = train(corpus, cfg, fcfg, hcfg);
  CHECK(a.weights == b.weights);

  cfg.seed = 100;
  const Policy c = train(corpus, cfg, fcfg, hcfg);
  CHECK(a.weights != c.weights);
}

TEST_CASE("train rejects unlabelled clauses and empty corpora") {
  FeatureConfig fcfg;
  HAConfig hcfg;
  LspiConfig cfg;

  Corpus empty;
  empty.labels = LabelSet({"a", "b"});
  CHECK_THROWS_AS(train(empty, cfg, fcfg, hcfg), ValidationError);

  Corpus unlabelled = tiny_training_corpus();
  unlabelled.documents[1].clauses[0].gold_label.reset();
  CHECK_THROWS_WITH_AS(train(unlabelled, cfg, fcfg, hcfg),
                       doctest::Contains("gold label"), ValidationError);
}

TEST_CASE("gamma = 0 with unique indicator clauses reaches training accuracy 1") {
  // one unique token per clause: with gamma = 0 the Q-fit reduces to the
  // per-(state, action) mean reward, whose argmax is the gold label
  Corpus corpus;
  corpus.labels = LabelSet({"a", "b"});
  const std::vector<int> golds = {0, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 0};
  FeatureConfig fcfg;
  fcfg.hash_dim = 64;
  std::vector<std::uint64_t> buckets;
  int clause_index = 0;
  for (int d = 0; d < 3; ++d) {
    Document doc;
    doc.id = "doc" + std::to_string(d);
    for (int c = 0; c < 4; ++c, ++clause_index) {
      const std::string token = "clause" + std::to_string(clause_index);
      buckets.push_back(fnv1a64(token) % fcfg.hash_dim);
      doc.clauses.push_back(make_clause(token, golds[clause_index]));
    }
    corpus.documents.push_back(std::move(doc));
  }
  std::sort(buckets.begin(), buckets.end());
  REQUIRE(std::adjacent_find(buckets.begin(), buckets.end()) == buckets.end());

  HAConfig hcfg;  // (0, 0)
  LspiConfig cfg;
  cfg.gamma = 0.0;
  cfg.episodes = 40;
  cfg.epsilon0 = 1.0;  // pure random exploration samples every action
  cfg.epsilon_decay = 1.0;
  cfg.epsilon_floor = 1.0;
  cfg.seed = 5;
  const Policy policy = train(corpus, cfg, fcfg, hcfg);

  const Featurizer featurizer(fcfg, hcfg, corpus.labels);
  int correct = 0, total = 0;
  for (const auto& doc : corpus.documents) {
    AnnotationHistory history;
    history.last_round.assign(doc.clauses.size(), std::nullopt);
    for (std::size_t pos = 0; pos < doc.clauses.size(); ++pos) {
      const int a = greedy_action(policy, featurizer.state(doc, static_cast<int>(pos), history));
      correct += a == *doc.clauses[pos].gold_label ? 1 : 0;
      ++total;
    }
  }
  CHECK(correct == total);
}
