#include "bitml/liquidity.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <future>
#include <thread>

namespace bitml {

std::size_t default_state_cap() {
  if (const char* env = std::getenv("BITML_STATE_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1000000;
}

std::size_t StateSpace::edge_count() const {
  std::size_t n = 0;
  for (const auto& e : edges) n += e.size();
  return n;
}

std::vector<std::pair<std::size_t, StateEdge>> StateSpace::path_to(std::size_t s) const {
  std::vector<std::pair<std::size_t, StateEdge>> path;
  while (s != initial) {
    const std::size_t p = parent[s];
    path.push_back({p, edges[p][parent_edge[s]]});
    s = p;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

AbsConfig initial_abstract_state(const ContractSpec& spec,
                                 const std::set<Participant>& observers) {
  AbsConfig cfg;
  cfg.terms.push_back({kRootOrigin, kRootOrigin, abstract_contract(spec.root.contract, observers, spec)});
  return cfg;
}

StateSpace build_state_space(const AbsConfig& initial, const AbsEquations& eqs, std::size_t cap) {
  StateSpace sp;
  sp.equations = eqs;
  auto add = [&](const AbsConfig& c, std::size_t parent, std::size_t edge) -> std::size_t {
    CanonicalState cs = canonicalize(c);
    auto it = sp.index.find(cs.text);
    if (it != sp.index.end()) return it->second;
    if (sp.states.size() >= cap) throw StateCapExceeded(cap);
    const std::size_t id = sp.states.size();
    sp.index.emplace(cs.text, id);
    sp.states.push_back(c);
    sp.canon.push_back(std::move(cs));
    sp.edges.emplace_back();
    sp.parent.push_back(parent == SIZE_MAX ? id : parent);
    sp.parent_edge.push_back(edge);
    return id;
  };
  sp.initial = add(initial, SIZE_MAX, 0);
  for (std::size_t s = 0; s < sp.states.size(); ++s) {
    const AbsConfig cur = sp.states[s];
    for (auto& m : fin_enabled(cur, eqs)) {
      const std::size_t slot = canonical_slot(cur, m.label.target);
      const std::size_t to = add(m.next, s, sp.edges[s].size());
      sp.edges[s].push_back({m.label, slot, m.branch->key, to});
    }
  }
  return sp;
}

StateSpace build_state_space(const LiquidityProblem& problem, std::size_t cap) {
  return build_state_space(initial_abstract_state(problem.spec, problem.observers),
                           abstract_equations(problem.spec, problem.observers), cap);
}

// ---------------------------------------------------------------------------
// Liquidability

namespace {

AbsConfig restrict_to_origin(const AbsConfig& state, const std::string& origin) {
  AbsConfig sub;
  sub.next_name = state.next_name;
  for (const auto& t : state.terms)
    if (t.origin == origin) sub.terms.push_back(t);
  return sub;
}

struct Search {
  std::vector<AbsConfig> nodes;
  std::vector<std::size_t> parent;
  std::vector<AbsLabel> label;
  std::vector<std::string> branch;
  std::optional<std::size_t> goal;
};

Search search_liquidation(const AbsConfig& start, const AbsEquations& eqs) {
  Search s;
  std::unordered_map<std::string, std::size_t> seen;
  s.nodes.push_back(start);
  s.parent.push_back(0);
  s.label.push_back({});
  s.branch.push_back({});
  seen.emplace(canonicalize(start).text, 0);
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    if (s.nodes[i].terms.empty()) {
      s.goal = i;
      return s;
    }
    const AbsConfig cur = s.nodes[i];
    for (auto& m : abs_enabled(cur, eqs)) {
      if (m.label.starred) continue;
      auto [it, fresh] = seen.emplace(canonicalize(m.next).text, s.nodes.size());
      if (!fresh) continue;
      s.nodes.push_back(std::move(m.next));
      s.parent.push_back(i);
      s.label.push_back(m.label);
      s.branch.push_back(m.branch->key);
    }
  }
  return s;
}

}  // namespace

Liquidation liquidable(const AbsConfig& state, const std::string& origin,
                       const AbsEquations& eqs) {
  Search s = search_liquidation(restrict_to_origin(state, origin), eqs);
  Liquidation out;
  if (!s.goal) return out;
  out.ok = true;
  for (std::size_t i = *s.goal; i != 0; i = s.parent[i]) {
    out.witness.push_back(s.label[i]);
    out.branches.push_back(s.branch[i]);
  }
  std::reverse(out.witness.begin(), out.witness.end());
  std::reverse(out.branches.begin(), out.branches.end());
  return out;
}

std::optional<std::size_t> liquidable_length(const AbsConfig& state, const std::string& origin,
                                             const AbsEquations& eqs, LiquidableCache& cache) {
  const AbsConfig sub = restrict_to_origin(state, origin);
  const std::string key = canonicalize(sub).text;
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  Search s = search_liquidation(sub, eqs);
  std::optional<std::size_t> len;
  if (s.goal) {
    len = 0;
    for (std::size_t i = *s.goal; i != 0; i = s.parent[i]) ++*len;
  }
  cache.emplace(key, len);
  return len;
}

bool liquidable(const StateSpace& space, std::size_t s, const std::string& origin) {
  LiquidableCache cache;
  return liquidable_length(space.states.at(s), origin, space.equations, cache).has_value();
}

bool solvable(const AbsGuarded& b) {
  if (b->starred) return false;
  switch (b->kind) {
    case AbsGuardedNode::Kind::Withdraw:
      return true;
    case AbsGuardedNode::Kind::Tau:
      return solvable(b->cont);
    case AbsGuardedNode::Kind::Split:
      return std::all_of(b->parts.begin(), b->parts.end(),
                         [](const AbsContract& c) { return solvable(c); });
    case AbsGuardedNode::Kind::Rngt:
      return false;
  }
  return false;
}

bool solvable(const AbsContract& term) {
  return std::any_of(term.branches().begin(), term.branches().end(),
                     [](const AbsGuarded& b) { return solvable(b); });
}

// ---------------------------------------------------------------------------
// Verdicts

std::string status_string(OriginVerdict::Status s) {
  switch (s) {
    case OriginVerdict::Status::Liquid:
      return "liquid";
    case OriginVerdict::Status::NotVerified:
      return "not verified liquid (abstract counterexample attached)";
    case OriginVerdict::Status::EmptyStuck:
      return "empty stuck contract";
  }
  return "";
}

namespace {

using Lengths = std::vector<std::vector<std::optional<std::size_t>>>;  // [state][origin]

Lengths all_lengths(const StateSpace& space, const std::vector<std::string>& origins) {
  Lengths out(space.states.size(), std::vector<std::optional<std::size_t>>(origins.size()));
  auto work = [&](std::size_t lo, std::size_t hi) {
    LiquidableCache cache;
    for (std::size_t s = lo; s < hi; ++s)
      for (std::size_t o = 0; o < origins.size(); ++o)
        out[s][o] = liquidable_length(space.states[s], origins[o], space.equations, cache);
  };
  const std::size_t n = space.states.size();
  const std::size_t threads =
      n < 256 ? 1 : std::max<std::size_t>(1, std::min<std::size_t>(8, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> fs;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    fs.push_back(std::async(std::launch::async, work, lo, hi));
  }
  for (auto& f : fs) f.get();
  return out;
}

// Innermost unsolvable part the observers are forced into: a lone unstarred
// split or reveal is descended, anything else is the culprit itself.
const AbsContract& blocking_subterm(const AbsContract& c) {
  const AbsGuarded* forced = nullptr;
  for (const auto& b : c.branches()) {
    if (b->starred || b->kind == AbsGuardedNode::Kind::Withdraw || b->kind == AbsGuardedNode::Kind::Rngt)
      continue;
    if (forced) return c;
    forced = &b;
  }
  if (!forced) return c;
  if ((*forced)->kind == AbsGuardedNode::Kind::Tau) return blocking_subterm((*forced)->cont);
  for (const auto& p : (*forced)->parts)
    if (!solvable(p)) return blocking_subterm(p);
  return c;
}

std::string witness_label(const StateEdge& e) {
  return (e.label.starred ? "*" : "") + std::string("[") + std::to_string(e.target_slot) + "] " +
         e.branch;
}

}  // namespace

Verdict check_liquidity(const StateSpace& space, const std::set<std::string>& origins,
                        const std::string& contract, const std::set<Participant>& observers) {
  Verdict v;
  v.contract = contract;
  for (const auto& p : observers) v.observers.push_back(p.value);
  v.states = space.states.size();
  v.edges = space.edge_count();
  const std::vector<std::string> os(origins.begin(), origins.end());
  const Lengths lens = all_lengths(space, os);

  for (std::size_t o = 0; o < os.size(); ++o) {
    OriginVerdict d;
    d.origin = os[o];
    for (std::size_t s = 0; s < lens.size(); ++s) {
      if (lens[s][o]) {
        v.max_liquidation = std::max(v.max_liquidation, *lens[s][o]);
        continue;
      }
      const AbsConfig& st = space.states[s];
      std::vector<std::pair<std::string, AbsTerm>> terms;
      for (const auto& t : st.terms)
        if (t.origin == os[o]) terms.push_back({t.term.key(), t});
      std::sort(terms.begin(), terms.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::string stuck = terms.empty() ? std::string() : terms.front().first;
      bool empty_stuck = false;
      for (const auto& [k, t] : terms) {
        AbsConfig one;
        one.terms.push_back(t);
        if (!liquidable(one, os[o], space.equations).ok) {
          const AbsContract& culprit = blocking_subterm(t.term);
          stuck = culprit.key();
          empty_stuck = culprit.empty();
          break;
        }
      }
      d.status = empty_stuck ? OriginVerdict::Status::EmptyStuck
                             : OriginVerdict::Status::NotVerified;
      d.stuck_term = stuck;
      d.stuck_state = s;
      std::vector<WitnessStep> w;
      for (const auto& [from, e] : space.path_to(s)) w.push_back({from, witness_label(e)});
      d.witness = std::move(w);
      v.liquid = false;
      break;
    }
    v.details.push_back(std::move(d));
  }
  return v;
}

Verdict check_liquidity(const LiquidityProblem& problem, const std::string& contract,
                        std::size_t cap) {
  const StateSpace space = build_state_space(problem, cap);
  return check_liquidity(space, {kRootOrigin}, contract, problem.observers);
}

}  // namespace bitml
