#include "bitml/corpus.hpp"
#include "bitml/liquidity.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <deque>
#include <random>

namespace bitml {
namespace {

using test::P;

LiquidityProblem problem(const std::string& file, std::set<Participant> obs) {
  return {test::corpus_spec(file), std::move(obs)};
}

// Hand-unrolled: the root term, its reveal continuation, and nothing.
TEST(StateSpace, TimedCommitmentHasThreeStates) {
  for (const char* obs : {"A", "B"}) {
    const StateSpace sp = build_state_space(problem("tc.bitml", {P(obs)}));
    EXPECT_EQ(sp.states.size(), 3u) << obs;
    EXPECT_EQ(sp.edge_count(), 3u) << obs;
    std::set<std::string> texts;
    for (const auto& c : sp.canon) texts.insert(c.text);
    EXPECT_TRUE(texts.count("|"));
    EXPECT_TRUE(texts.count("<withdraw A>@main |"));
  }
}

TEST(StateSpace, EmptyStartHasNoEdges) {
  const StateSpace sp = build_state_space(AbsConfig{}, {});
  EXPECT_EQ(sp.states.size(), 1u);
  EXPECT_EQ(sp.edge_count(), 0u);
}

TEST(StateSpace, CapIsEnforced) {
  EXPECT_THROW(build_state_space(problem("zcb3.bitml", {P("A")}), 10), StateCapExceeded);
  try {
    build_state_space(problem("zcb3.bitml", {P("A")}), 10);
  } catch (const StateCapExceeded& e) {
    EXPECT_EQ(e.cap(), 10u);
  }
}

TEST(StateSpace, CountsAreDeterministic) {
  for (const char* f : {"lottery_win2.bitml", "cfg.bitml", "escrow.bitml"}) {
    const auto a = build_state_space(problem(f, {P("A")}));
    const auto b = build_state_space(problem(f, {P("A")}));
    EXPECT_EQ(a.states.size(), b.states.size());
    EXPECT_EQ(a.edge_count(), b.edge_count());
    for (std::size_t i = 0; i < a.canon.size(); ++i) EXPECT_EQ(a.canon[i].text, b.canon[i].text);
  }
}

AbsConfig single_term(const AbsContract& c) {
  AbsConfig cfg;
  cfg.terms.push_back({cfg.fresh(), "o", c});
  return cfg;
}

TEST(Liquidable, Examples) {
  const AbsContract w({abs_withdraw(P("B"))});
  EXPECT_TRUE(liquidable(single_term(w), "o", {}).ok);
  EXPECT_EQ(liquidable(single_term(w), "o", {}).witness.size(), 1u);
  EXPECT_FALSE(liquidable(single_term(AbsContract({star(abs_withdraw(P("B")))})), "o", {}).ok);
  EXPECT_FALSE(liquidable(single_term(AbsContract()), "o", {}).ok);
  EXPECT_FALSE(liquidable(single_term(AbsContract({abs_rngt("X")})), "o", {{"X", w}}).ok);
  EXPECT_TRUE(liquidable(single_term(AbsContract({abs_tau(w), star(abs_withdraw(P("A")))})), "o", {}).ok);
  // Other origins are ignored.
  EXPECT_TRUE(liquidable(single_term(AbsContract()), "elsewhere", {}).ok);
  const AbsContract sp({abs_split({w, AbsContract({abs_tau(w)})})});
  const Liquidation l = liquidable(single_term(sp), "o", {});
  EXPECT_TRUE(l.ok);
  EXPECT_EQ(l.witness.size(), 4u);
}

TEST(Solvable, Examples) {
  const AbsContract w({abs_withdraw(P("A"))});
  EXPECT_TRUE(solvable(w));
  EXPECT_FALSE(solvable(AbsContract()));
  EXPECT_FALSE(solvable(AbsContract({star(abs_tau(w))})));
  EXPECT_TRUE(solvable(AbsContract({star(abs_tau(w)), abs_tau(w)})));
  EXPECT_FALSE(solvable(AbsContract({abs_split({w, AbsContract()})})));
  EXPECT_TRUE(solvable(AbsContract({abs_split({})})));
  EXPECT_FALSE(solvable(AbsContract({abs_rngt("X")})));
}

AbsContract random_contract(std::mt19937_64& rng, int depth);

AbsGuarded random_guarded(std::mt19937_64& rng, int depth) {
  AbsGuarded g;
  switch (depth <= 1 ? rng() % 2 : rng() % 4) {
    case 0:
      g = abs_withdraw(P(rng() % 2 ? "A" : "B"));
      break;
    case 1:
      g = abs_rngt(rng() % 2 ? "X" : "Y");
      break;
    case 2:
      g = abs_tau(random_contract(rng, depth - 1));
      break;
    default: {
      std::vector<AbsContract> parts;
      for (std::size_t i = 0, n = rng() % 3; i < n; ++i) parts.push_back(random_contract(rng, depth - 1));
      g = abs_split(std::move(parts));
    }
  }
  return rng() % 4 == 0 ? star(g) : g;
}

AbsContract random_contract(std::mt19937_64& rng, int depth) {
  std::vector<AbsGuarded> bs;
  for (std::size_t i = 0, n = rng() % 4; i < n; ++i) bs.push_back(random_guarded(rng, depth));
  return AbsContract(std::move(bs));
}

TEST(Oracle, RandomTermsAgree) {
  std::mt19937_64 rng(2024);
  const AbsEquations eqs{{"X", AbsContract({abs_withdraw(P("A"))})},
                         {"Y", AbsContract({abs_rngt("X")})}};
  int liquid = 0;
  for (int i = 0; i < 10000; ++i) {
    const AbsContract c = random_contract(rng, 1 + static_cast<int>(rng() % 6));
    ASSERT_LE(abs_depth(c), 6u);
    const bool s = solvable(c);
    ASSERT_EQ(s, liquidable(single_term(c), "o", eqs).ok) << c.key();
    liquid += s;
  }
  // Both outcomes are exercised.
  EXPECT_GT(liquid, 1000);
  EXPECT_LT(liquid, 9000);
}

TEST(Oracle, CorpusStatesAgree) {
  for (const auto& e : corpus_contents(BITML_CORPUS_DIR)) {
    const ContractSpec spec = test::corpus_spec(e.file);
    const std::set<Participant> obs = resolve_observers(spec, e.observers);
    const StateSpace sp = build_state_space({spec, obs});
    for (std::size_t s = 0; s < sp.states.size(); ++s) {
      bool all = true;
      for (const auto& t : sp.states[s].terms) {
        AbsConfig cfg;
        cfg.terms.push_back(t);
        const bool solo = liquidable(cfg, t.origin, sp.equations).ok;
        ASSERT_EQ(solvable(t.term), solo) << e.file << " " << t.term.key();
        all = all && solo;
      }
      EXPECT_EQ(liquidable(sp, s, kRootOrigin), all) << e.file << " state " << s;
    }
  }
}

// Replays a liquidation witness with abs_fire and checks it empties the origin.
TEST(Witness, LiquidationWitnessReplays) {
  const StateSpace sp = build_state_space(problem("lottery_win2.bitml", {P("A")}));
  for (std::size_t s = 0; s < sp.states.size(); ++s) {
    const Liquidation l = liquidable(sp.states[s], kRootOrigin, sp.equations);
    ASSERT_TRUE(l.ok);
    AbsConfig cur = sp.states[s];
    for (std::size_t i = 0; i < l.witness.size(); ++i) {
      EXPECT_FALSE(l.witness[i].starred);
      const AbsTerm* t = cur.find(l.witness[i].target);
      ASSERT_NE(t, nullptr);
      const AbsGuarded* b = nullptr;
      for (const auto& g : t->term.branches())
        if (g->key == l.branches[i]) b = &g;
      ASSERT_NE(b, nullptr);
      cur = abs_fire(cur, t->name, *b, sp.equations).next;
    }
    EXPECT_TRUE(cur.terms.empty());
  }
}

TEST(Witness, CounterexamplePathReachesStuckState) {
  const ContractSpec spec = test::corpus_spec("lottery_win.bitml");
  const StateSpace sp = build_state_space({spec, {P("A")}});
  const Verdict v = check_liquidity(sp, {kRootOrigin}, "lottery_win", {P("A")});
  ASSERT_FALSE(v.liquid);
  const OriginVerdict& d = v.details.at(0);
  ASSERT_TRUE(d.stuck_state && d.witness);
  std::size_t at = sp.initial;
  for (const auto& w : *d.witness) {
    EXPECT_EQ(w.state, at);
    bool moved = false;
    for (const auto& e : sp.edges[at])
      if ((e.label.starred ? "*" : "") + std::string("[") + std::to_string(e.target_slot) + "] " + e.branch ==
          w.label) {
        at = e.to;
        moved = true;
        break;
      }
    ASSERT_TRUE(moved) << w.label;
  }
  EXPECT_EQ(at, *d.stuck_state);
  EXPECT_FALSE(liquidable(sp, at, kRootOrigin));
  EXPECT_EQ(*d.stuck_term, "*tau.(withdraw A) + *tau.(withdraw B)");
  EXPECT_NE(explain(v).find(*d.stuck_term), std::string::npos);
}

TEST(Verdict, EmptyChoiceIsReportedAsSuch) {
  AbsConfig cfg;
  cfg.terms.push_back({"t", kRootOrigin, AbsContract({abs_split({AbsContract()})})});
  const StateSpace sp = build_state_space(cfg, {});
  const Verdict v = check_liquidity(sp, {kRootOrigin}, "c", {P("A")});
  EXPECT_FALSE(v.liquid);
  EXPECT_EQ(v.details[0].status, OriginVerdict::Status::EmptyStuck);
}

TEST(Verdict, JsonRoundTrip) {
  for (const char* f : {"tc.bitml", "lottery_win.bitml", "escrow.bitml"}) {
    const Verdict v = check_liquidity(problem(f, {P("A")}), f);
    const Verdict back = verdict_from_json(verdict_to_json(v));
    EXPECT_EQ(verdict_to_json(back), verdict_to_json(v));
    EXPECT_EQ(back.liquid, v.liquid);
    EXPECT_EQ(back.states, v.states);
  }
  EXPECT_THROW(verdict_from_json(nlohmann::json::parse("{}")), std::exception);
}

TEST(Verdict, MoreObserversNeverHurt) {
  for (const auto& f : corpus_files(BITML_CORPUS_DIR)) {
    const ContractSpec spec = test::corpus_spec(f);
    const auto& ps = spec.participants;
    ASSERT_LE(ps.size(), 6u);
    std::map<unsigned, bool> liquid;
    for (unsigned mask = 1; mask < (1u << ps.size()); ++mask) {
      std::set<Participant> obs;
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (mask >> i & 1) obs.insert(ps[i]);
      liquid[mask] = check_liquidity({spec, obs}).liquid;
    }
    for (const auto& [m, l] : liquid)
      for (const auto& [n, k] : liquid)
        if ((m & n) == m && l) EXPECT_TRUE(k) << f << " " << m << " <= " << n;
  }
}

// Liquidity over the unrestricted abstract semantics, explored to a depth
// bound, against the finite refinement.
bool bounded_abs_liquid(const LiquidityProblem& p, std::size_t depth) {
  const AbsEquations eqs = abstract_equations(p.spec, p.observers);
  std::deque<std::pair<AbsConfig, std::size_t>> todo{{initial_abstract_state(p.spec, p.observers), 0}};
  std::set<std::string> seen;
  while (!todo.empty()) {
    auto [cfg, d] = todo.front();
    todo.pop_front();
    if (!seen.insert(canonicalize(cfg).text).second) continue;
    if (!liquidable(cfg, kRootOrigin, eqs).ok) return false;
    if (d == depth) continue;
    for (auto& m : abs_enabled(cfg, eqs)) todo.push_back({std::move(m.next), d + 1});
  }
  return true;
}

TEST(Verdict, FiniteRefinementAgreesWithBoundedAbstractSemantics) {
  for (const char* f : {"tc.bitml", "tc_rec.bitml", "mtc1.bitml", "c2.bitml", "zcb.bitml", "cfg.bitml",
                        "escrow.bitml", "lottery_win.bitml"}) {
    const ContractSpec spec = test::corpus_spec(f);
    std::size_t depth = 2 * spec.equations.size() + contract_depth(spec.root.contract);
    for (const auto& [_, eq] : spec.equations) depth = std::max(depth, 2 * spec.equations.size() + contract_depth(eq.body.contract));
    for (const auto& p : spec.participants) {
      const LiquidityProblem prob{spec, {p}};
      EXPECT_EQ(bounded_abs_liquid(prob, depth), check_liquidity(prob).liquid) << f << " " << p.value;
    }
  }
}

TEST(Verdict, StatesJsonShape) {
  const StateSpace sp = build_state_space(problem("tc.bitml", {P("A")}));
  const auto j = states_to_json(sp);
  EXPECT_EQ(j["states"].size(), 3u);
  EXPECT_EQ(j["edges"].size(), 3u);
  for (const auto& e : j["edges"]) EXPECT_LT(e["to"].get<std::size_t>(), 3u);
}

}  // namespace
}  // namespace bitml
