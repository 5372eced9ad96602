#include "bitml/concrete.hpp"
#include "bitml/corpus.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace bitml {
namespace {

using test::P;

const Guarded& only_branch(const Configuration& cfg, const std::string& x) {
  return cfg.find_contract(x)->contract.branches().front();
}

bool enabled(const Configuration& cfg, const Label& l, const ContractSpec& spec) {
  try {
    apply_step(cfg, l, spec);
    return true;
  } catch (const RuleNotEnabled&) {
    return false;
  }
}

TEST(Stipulation, RunningExampleEndsWithValueTwo) {
  const ContractSpec spec = parse_spec_or_throw(R"(
(participants A B)
(honest A B)
(main (pre (deposit A 1 x) (deposit B 1 (var y)) (secret A a))
  (choice (withdraw A) (withdraw B))))");
  bitml::Run run{initial_configuration(spec, 0), {}};
  ASSERT_EQ(run.initial.deposits.size(), 2u);
  const std::string y = run.initial.deposits[1].name;
  const Advertisement& adv = spec.root;

  run.push(label::Adv{adv}, spec);
  EXPECT_EQ(run.last().adverts.size(), 1u);
  run.push(label::AuthCommit{P("A"), adv, {{"a", Integer(7)}}, {}}, spec);
  run.push(label::AuthCommit{P("B"), adv, {}, {{"y", y}}}, spec);
  EXPECT_EQ(run.last().bindings.size(), 1u);
  // Nobody can authorize twice.
  EXPECT_FALSE(enabled(run.last(), label::AuthCommit{P("A"), adv, {{"a", Integer(7)}}, {}}, spec));
  run.push(label::AuthInitDep{P("A"), adv, "x"}, spec);
  run.push(label::AuthInitDep{P("B"), adv, y}, spec);
  run.push(label::Init{adv}, spec);

  const Configuration& end = run.last();
  ASSERT_EQ(end.contracts.size(), 1u);
  EXPECT_EQ(end.contracts[0].value, 2);
  EXPECT_EQ(end.contracts[0].contract, spec.root.contract);
  EXPECT_TRUE(end.deposits.empty());
  EXPECT_TRUE(end.auths.empty());
  EXPECT_TRUE(end.adverts.empty());
  EXPECT_TRUE(end.bindings.empty());
  ASSERT_EQ(end.committed.size(), 1u);
  EXPECT_EQ(end.committed[0].secret, "a");
  EXPECT_EQ(*end.committed[0].value, 7);
  EXPECT_TRUE(check_configuration(end).empty());
}

TEST(Stipulation, HonestParticipantCannotCommitBottom) {
  const ContractSpec spec = test::corpus_spec("tc.bitml");
  Configuration cfg = apply_step(initial_configuration(spec), label::Adv{spec.root}, spec);
  EXPECT_FALSE(enabled(cfg, label::AuthCommit{P("A"), spec.root, {{"a", std::nullopt}}, {}}, spec));
  ContractSpec dishonest = spec;
  dishonest.honest.clear();
  EXPECT_TRUE(enabled(cfg, label::AuthCommit{P("A"), spec.root, {{"a", std::nullopt}}, {}}, dishonest));
}

TEST(Stipulation, CommitRequiresInitBeforeSpend) {
  const ContractSpec spec = test::corpus_spec("tc.bitml");
  Configuration cfg = apply_step(initial_configuration(spec), label::Adv{spec.root}, spec);
  EXPECT_FALSE(enabled(cfg, label::AuthInitDep{P("A"), spec.root, "x"}, spec));
  EXPECT_FALSE(enabled(cfg, label::Init{spec.root}, spec));
}

TEST(Split, TenIntoFourAndSix) {
  const ContractSpec spec;
  Configuration cfg;
  const Contract c1 = single(gwithdraw(P("A"))), c2 = single(gwithdraw(P("B")));
  cfg.contracts.push_back({"x", single(gsplit({{2, c1}, {3, c2}})), Rational(10)});
  const Configuration out = apply_step(cfg, label::Split{"x", only_branch(cfg, "x")}, spec);
  ASSERT_EQ(out.contracts.size(), 2u);
  EXPECT_EQ(out.contracts[0].contract, c1);
  EXPECT_EQ(out.contracts[0].value, 4);
  EXPECT_EQ(out.contracts[1].contract, c2);
  EXPECT_EQ(out.contracts[1].value, 6);
  EXPECT_EQ(out.total_value(), 10);
  cfg.contracts[0].value = 5;
  const Configuration five = apply_step(cfg, label::Split{"x", only_branch(cfg, "x")}, spec);
  EXPECT_EQ(five.contracts[0].value, 2);
  EXPECT_EQ(five.contracts[1].value, 3);
}

TEST(Split, ExactRationalShares) {
  const ContractSpec spec;
  Configuration cfg;
  const Contract w = single(gwithdraw(P("A")));
  cfg.contracts.push_back({"x", single(gsplit({{1, w}, {1, w}, {1, w}})), Rational(1)});
  const Configuration out = apply_step(cfg, label::Split{"x", only_branch(cfg, "x")}, spec);
  for (const auto& c : out.contracts) EXPECT_EQ(c.value, Rational(1, 3));
  EXPECT_EQ(out.total_value(), 1);
}

TEST(Reveal, FiresIffSecretsAreEqual) {
  const ContractSpec spec;
  const Contract cont = single(gwithdraw(P("A")));
  const Guarded put = gput({"a", "b"}, peq(asecret("a"), asecret("b")), cont);
  for (int n = 0; n < 4; ++n)
    for (int m = 0; m < 4; ++m) {
      Configuration cfg;
      cfg.contracts.push_back({"x", single(put), Rational(3)});
      cfg.revealed.push_back({P("A"), "a", n});
      cfg.revealed.push_back({P("B"), "b", m});
      const label::Rev l{"x", put};
      ASSERT_EQ(enabled(cfg, l, spec), n == m) << n << " " << m;
      if (n != m) continue;
      const Configuration out = apply_step(cfg, l, spec);
      ASSERT_EQ(out.contracts.size(), 1u);
      EXPECT_NE(out.contracts[0].name, "x");
      EXPECT_EQ(out.contracts[0].contract, cont);
      EXPECT_EQ(out.contracts[0].value, 3);
    }
}

TEST(Reveal, NeedsRevealedSecret) {
  const ContractSpec spec;
  const Guarded put = gput({"a"}, ptrue(), single(gwithdraw(P("A"))));
  Configuration cfg;
  cfg.contracts.push_back({"x", single(put), Rational(1)});
  cfg.committed.push_back({P("A"), "a", Integer(1)});
  EXPECT_FALSE(enabled(cfg, label::Rev{"x", put}, spec));
  cfg = apply_step(cfg, label::AuthRev{P("A"), "a"}, spec);
  EXPECT_TRUE(enabled(cfg, label::Rev{"x", put}, spec));
  // Only the owner reveals, and never a bottom commitment.
  Configuration bot;
  bot.committed.push_back({P("A"), "a", std::nullopt});
  EXPECT_FALSE(enabled(bot, label::AuthRev{P("A"), "a"}, spec));
  bot.committed[0].value = 2;
  EXPECT_FALSE(enabled(bot, label::AuthRev{P("B"), "a"}, spec));
}

TEST(Branch, AuthorizedDeadlineBranchAt1051) {
  const ContractSpec spec;
  const Guarded d = gauth(P("A"), gafter(sconst(1000), gwithdraw(P("B"))));
  const Guarded other = gafter(sconst(5000), gwithdraw(P("A")));
  Configuration cfg;
  cfg.contracts.push_back({"x", choice({d, other}), Rational(1)});
  cfg.time = 1051;
  const label::Withdraw fire{P("B"), Rational(1), "x", d};
  EXPECT_FALSE(enabled(cfg, fire, spec)) << "needs A's authorization";

  cfg = apply_step(cfg, label::AuthBranch{P("A"), "x", d}, spec);
  const Configuration out = apply_step(cfg, fire, spec);
  EXPECT_TRUE(out.contracts.empty());
  ASSERT_EQ(out.deposits.size(), 1u);
  EXPECT_EQ(out.deposits[0].owner, P("B"));
  EXPECT_EQ(out.deposits[0].value, 1);
  EXPECT_TRUE(out.auths.empty());
  EXPECT_EQ(out.time, 1051);

  Configuration early = cfg;
  early.time = 999;
  EXPECT_FALSE(enabled(early, fire, spec));
  early.time = 1000;
  EXPECT_TRUE(enabled(early, fire, spec));
}

TEST(Branch, AuthorizationBeforeFiring) {
  const ContractSpec spec;
  const Guarded d = gauth(P("A"), gwithdraw(P("B")));
  Configuration cfg;
  cfg.contracts.push_back({"x", choice({d, gafter(sconst(9), gwithdraw(P("A")))}), Rational(1)});
  bool auth = false, fire = false;
  for (const auto& m : enumerate_moves(cfg, spec)) {
    if (auto* a = std::get_if<label::AuthBranch>(&m.label)) auth |= a->by == P("A") && a->branch == d;
    if (auto* w = std::get_if<label::Withdraw>(&m.label)) fire |= w->branch == d;
  }
  EXPECT_TRUE(auth);
  EXPECT_FALSE(fire);
}

TEST(Delay, DeadlineAtOneThousand) {
  const ContractSpec spec;
  const Guarded d = gafter(sconst(1000), gwithdraw(P("B")));
  Configuration cfg;
  cfg.contracts.push_back({"x", single(d), Rational(1)});
  cfg.time = 999;
  auto fires = [&](const Configuration& c) {
    for (const auto& m : enumerate_moves(c, spec))
      if (std::holds_alternative<label::Withdraw>(m.label)) return true;
    return false;
  };
  EXPECT_FALSE(fires(cfg));
  EXPECT_EQ(delay_candidates(cfg), (std::vector<Integer>{1, 2}));
  const Configuration later = apply_step(cfg, label::Delay{1}, spec);
  EXPECT_EQ(later.time, 1000);
  EXPECT_EQ(later.contracts.size(), 1u);
  EXPECT_TRUE(fires(later));
  EXPECT_FALSE(enabled(cfg, label::Delay{0}, spec));
}

TEST(Delay, NoDeadlinesNoDelays) {
  Configuration cfg;
  cfg.contracts.push_back({"x", single(gwithdraw(P("A"))), Rational(1)});
  EXPECT_TRUE(delay_candidates(cfg).empty());
}

TEST(Origin, SplitsOfTwoContracts) {
  const ContractSpec spec = parse_spec_or_throw(R"(
(participants A B)
(honest A B)
(main (pre (deposit A 1 z)) (split (1 -> (withdraw A)))))");
  Configuration g = initial_configuration(spec);
  const Contract c1 = single(gsplit({{1, single(gwithdraw(P("A")))}, {1, single(gwithdraw(P("B")))}}));
  g.contracts.push_back({"y", c1, Rational(2)});

  bitml::Run run{g, {}};
  const auto st = [&](const Label& l) { run.push(l, spec); };
  st(label::Adv{spec.root});
  st(label::AuthCommit{P("A"), spec.root, {}, {}});
  st(label::AuthInitDep{P("A"), spec.root, "z"});
  st(label::Init{spec.root});
  std::string x;
  for (const auto& n : run.last().contract_names())
    if (n != "y") x = n;
  st(label::Split{x, only_branch(run.last(), x)});
  const std::string x1 = run.last().contracts.back().name;
  st(label::Split{"y", only_branch(run.last(), "y")});
  const auto& cs = run.last().contracts;
  ASSERT_EQ(cs.size(), 3u);
  const std::string y1 = cs[1].name, y2 = cs[2].name;

  EXPECT_EQ(origin(run, y1), "y");
  EXPECT_EQ(origin(run, y2), "y");
  EXPECT_EQ(origin(run, x1), std::nullopt);
  EXPECT_EQ(origin(run, "y"), "y");
  EXPECT_EQ(origin(run, x), std::nullopt);
  EXPECT_EQ(descendants(run, {"y"}), (std::set<std::string>{y1, y2}));
  EXPECT_EQ(descendants(bitml::Run{g, {}}, {"y"}), std::set<std::string>{"y"});
}

TEST(Origin, RenegotiationKeepsOrigin) {
  const ContractSpec spec = test::corpus_spec("tc_rec.bitml");
  auto [run, root] = test::renegotiate_once(spec);
  ASSERT_FALSE(run.steps.empty());
  ASSERT_TRUE(std::holds_alternative<label::Rngt>(run.steps.back().label));
  const auto names = run.last().contract_names();
  ASSERT_EQ(names.size(), 1u);
  EXPECT_EQ(origin(run, *names.begin()), root);
  // The old balance plus A's fresh deposit.
  EXPECT_EQ(run.last().contracts[0].value, 2);
}

TEST(Runs, InvariantsAlongRandomRuns) {
  for (const auto& f : corpus_files(BITML_CORPUS_DIR)) {
    SCOPED_TRACE(f);
    const ContractSpec spec = test::corpus_spec(f);
    const Stipulation st = stipulate_root(spec);
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const Policy policy = Policy::parse(seed % 3 == 0 ? "uniform" : seed % 3 == 1 ? "progress" : "only:A");
      const bitml::Run run = random_run(st.run.last(), spec, 25, seed, policy);
      const Rational total = run.initial.total_value();
      Integer time = run.initial.time;
      for (const auto& s : run.steps) {
        EXPECT_EQ(s.config.total_value(), total) << to_string(s.label);
        EXPECT_GE(s.config.time, time);
        time = s.config.time;
        EXPECT_TRUE(check_configuration(s.config).empty()) << to_string(s.label);
        if (policy.kind == Policy::Kind::Only) EXPECT_TRUE(in_label_set(s.label, {P("A")}));
      }
      std::stringstream trace;
      write_trace(run, trace);
      EXPECT_EQ(replay_trace(run.initial, spec, trace), "");
    }
  }
}

TEST(Runs, DepthZeroIsEmpty) {
  const ContractSpec spec = test::corpus_spec("tc.bitml");
  const Stipulation st = stipulate_root(spec);
  EXPECT_TRUE(random_run(st.run.last(), spec, 0, 1).steps.empty());
}

TEST(Runs, StepsAreDeterministic) {
  const ContractSpec spec = test::corpus_spec("lottery_win2.bitml");
  const Configuration start = stipulate_root(spec).run.last();
  const bitml::Run a = random_run(start, spec, 20, 99), b = random_run(start, spec, 20, 99);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(to_string(a.steps[i].label), to_string(b.steps[i].label));
    EXPECT_EQ(config_digest(a.steps[i].config), config_digest(b.steps[i].config));
    EXPECT_EQ(config_digest(apply_step(i ? a.steps[i - 1].config : start, a.steps[i].label, spec)),
              config_digest(a.steps[i].config));
  }
}

TEST(Runs, TamperedTraceIsRejected) {
  const ContractSpec spec = test::corpus_spec("tc.bitml");
  const Configuration start = stipulate_root(spec).run.last();
  const bitml::Run run = random_run(start, spec, 5, 3, Policy::parse("progress"));
  ASSERT_FALSE(run.steps.empty());
  std::stringstream trace;
  write_trace(run, trace);
  std::string text = trace.str();
  const auto pos = text.find("config_digest", text.find('\n'));
  ASSERT_NE(pos, std::string::npos);
  const auto digit = text.find_first_of("0123456789abcdef", pos + 16);
  text[digit] = text[digit] == '0' ? '1' : '0';
  std::stringstream tampered(text);
  EXPECT_NE(replay_trace(start, spec, tampered), "");
}

TEST(Labels, Classification) {
  EXPECT_TRUE(is_participant_restricted(label::AuthRev{P("A"), "a"}));
  EXPECT_FALSE(is_participant_restricted(label::Delay{1}));
  EXPECT_EQ(rule_name(label::Delay{1}), "C-Delay");
  EXPECT_TRUE(in_label_set(label::AuthRev{P("A"), "a"}, {P("A")}));
  EXPECT_FALSE(in_label_set(label::AuthRev{P("B"), "b"}, {P("A")}));
  EXPECT_TRUE(in_label_set(label::Delay{3}, {P("A")}));
}

TEST(Canonical, RenamingInvariant) {
  Configuration a, b;
  const Contract c = single(gwithdraw(P("A")));
  a.contracts.push_back({"c:1", c, Rational(1)});
  a.deposits.push_back({"d:2", P("B"), Rational(2)});
  b.contracts.push_back({"c:7", c, Rational(1)});
  b.deposits.push_back({"d:9", P("B"), Rational(2)});
  EXPECT_EQ(canonical_key(a), canonical_key(b));
  b.time = 1;
  EXPECT_NE(canonical_key(a), canonical_key(b));
}

}  // namespace
}  // namespace bitml
