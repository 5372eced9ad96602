#include "bitml/corpus.hpp"
#include "bitml/correspondence.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace bitml {
namespace {

using test::P;

TEST(OverApproximation, TimedCommitmentRuns) {
  const ContractSpec spec = test::corpus_spec("tc.bitml");
  for (const char* obs : {"A", "B"}) {
    const auto rep = check_over_approximation(spec, {P(obs)}, 40, 10, 1);
    EXPECT_TRUE(rep.ok()) << (rep.failures.empty() ? "" : rep.failures[0]);
    EXPECT_EQ(rep.trials, 40u);
    EXPECT_GT(rep.matched, 0u);
  }
}

TEST(OverApproximation, RenegotiationIsOneStarredMove) {
  const ContractSpec spec = test::corpus_spec("tc_rec.bitml");
  auto [run, root] = test::renegotiate_once(spec);
  const RunMatch m = match_run(run, root, {P("A")}, spec);
  EXPECT_FALSE(m.failure) << *m.failure;
  EXPECT_EQ(m.abstract_moves, 1u);
}

TEST(OverApproximation, ForeignStepsMatchNothing) {
  const ContractSpec spec = test::corpus_spec("tc.bitml");
  const Stipulation st = stipulate_root(spec);
  bitml::Run run{st.run.last(), {}};
  run.push(label::AuthRev{P("A"), "a"}, spec);
  run.push(label::Delay{3}, spec);
  const RunMatch m = match_run(run, st.contract, {P("A")}, spec);
  EXPECT_FALSE(m.failure);
  EXPECT_EQ(m.abstract_moves, 0u);
}

TEST(OverApproximation, SmallCorpusSample) {
  for (const auto& f : corpus_files(BITML_CORPUS_DIR)) {
    const ContractSpec spec = test::corpus_spec(f);
    const auto rep = check_over_approximation(spec, {spec.participants.front()}, 15, 10, 7);
    EXPECT_TRUE(rep.ok()) << f << ": " << (rep.failures.empty() ? "" : rep.failures[0]);
  }
}

TEST(UnderApproximation, RealizedMovesStayInObserverLabels) {
  const ContractSpec spec = test::corpus_spec("mtc2.bitml");
  const std::set<Participant> obs{P("A")};
  const StateSpace sp = build_state_space({spec, obs});
  const auto rep = check_under_approximation(sp, spec, obs, 4);
  EXPECT_TRUE(rep.ok()) << (rep.failures.empty() ? "" : rep.failures[0]);
  EXPECT_GT(rep.trials, 0u);
}

TEST(UnderApproximation, RealizeMoveOrder) {
  const ContractSpec spec = parse_spec_or_throw(R"(
(participants A B)
(honest A B)
(main (pre (deposit A 1 x) (secret A a))
  (choice (put (a) (withdraw A)) (after 10 (withdraw B)))))");
  const std::set<Participant> obs{P("A")};
  const Catalog cat(spec, obs);
  EXPECT_GE(cat.size(), 2u);
  const AbsConfig init = initial_abstract_state(spec, obs);
  auto [cfg, names] = realize_state(init, cat, spec);
  ASSERT_EQ(names.size(), 1u);
  const AbsGuarded reveal = init.terms[0].term.branches()[0];
  ASSERT_EQ(reveal->key, "tau.(withdraw A)");
  const auto labels = realize_move(cfg, names[0], reveal, obs, spec);
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<label::AuthRev>(labels[0]));
  EXPECT_TRUE(std::holds_alternative<label::Rev>(labels[1]));
  const AbsGuarded late = init.terms[0].term.branches()[1];
  const auto delayed = realize_move(cfg, names[0], late, obs, spec);
  ASSERT_EQ(delayed.size(), 2u);
  EXPECT_EQ(std::get<label::Delay>(delayed[0]).delta, 10);
  for (const auto& l : delayed) EXPECT_TRUE(in_label_set(l, obs));
}

TEST(SpotCheck, LiquidTimedCommitment) {
  const ContractSpec spec = test::corpus_spec("tc.bitml");
  const auto rep = spot_check(spec, {P("A")});
  EXPECT_TRUE(rep.ok()) << (rep.counterexamples.empty() ? "" : rep.counterexamples[0]);
  EXPECT_GT(rep.starts, 0u);
  EXPECT_FALSE(rep.truncated);
}

TEST(SpotCheck, DonationIsCaught) {
  const ContractSpec spec = test::corpus_spec("donation.bitml");
  const auto rep = spot_check(spec, {P("A")});
  EXPECT_FALSE(rep.ok());
}

TEST(SpotCheck, ConcreteLiquidationOfWithdraw) {
  const ContractSpec spec;
  Configuration cfg;
  cfg.contracts.push_back({"x", single(gauth(P("A"), gwithdraw(P("B")))), Rational(1)});
  const auto path = concrete_liquidation(cfg, {"x"}, {P("A")}, spec);
  ASSERT_TRUE(path);
  EXPECT_EQ(path->size(), 2u);
  EXPECT_FALSE(concrete_liquidation(cfg, {"x"}, {P("B")}, spec));
}

}  // namespace
}  // namespace bitml
