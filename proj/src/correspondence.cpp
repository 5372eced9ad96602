#include "bitml/correspondence.hpp"

#include <algorithm>
#include <random>

namespace bitml {

namespace {

std::uint64_t name_index(const std::string& name) {
  const auto colon = name.rfind(':');
  if (colon == std::string::npos) return 0;
  try {
    return std::stoull(name.substr(colon + 1));
  } catch (const std::exception&) {
    return 0;
  }
}

/// Names in `after` but not in `before`, in creation order.
std::vector<std::string> introduced_names(const Configuration& before,
                                          const Configuration& after) {
  const auto old = before.contract_names();
  std::vector<std::string> out;
  for (const auto& x : after.contract_names())
    if (!old.count(x)) out.push_back(x);
  std::sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
    return name_index(a) < name_index(b);
  });
  return out;
}

std::optional<Guarded> fired_branch(const Label& l) {
  if (auto* w = std::get_if<label::Withdraw>(&l)) return w->branch;
  if (auto* s = std::get_if<label::Split>(&l)) return s->branch;
  if (auto* r = std::get_if<label::Rev>(&l)) return r->branch;
  if (auto* r = std::get_if<label::Rngt>(&l)) return r->branch;
  return std::nullopt;
}

/// Term text without tokens, with every origin replaced by `origin`.
std::string shape(const AbsConfig& cfg, const std::string& origin) {
  AbsConfig c;
  for (auto t : cfg.terms) {
    t.origin = origin;
    c.terms.push_back(std::move(t));
  }
  return canonicalize(c).text;
}

std::set<std::string> term_names(const AbsConfig& cfg) {
  std::set<std::string> out;
  for (const auto& t : cfg.terms) out.insert(t.name);
  return out;
}

std::string join(const std::set<std::string>& xs) {
  std::string s = "{";
  for (const auto& x : xs) s += (s.size() > 1 ? "," : "") + x;
  return s + "}";
}

}  // namespace

RunMatch match_run(const Run& run, const std::string& observed,
                   const std::set<Participant>& observers, const ContractSpec& spec) {
  RunMatch out;
  const AbsEquations eqs = abstract_equations(spec, observers);
  AbsConfig abs = abstract_config(run.initial, observers, {observed}, spec);
  if (abs.terms.empty()) {
    out.failure = "contract " + observed + " is not in the initial configuration";
    return out;
  }
  Run prefix{run.initial, {}};
  const Configuration* prev = &run.initial;
  for (std::size_t i = 0; i < run.steps.size(); ++i) {
    const Step& st = run.steps[i];
    prefix.steps.push_back(st);
    const auto x = consumed_contract(st.label);
    const std::string where = "step " + std::to_string(i) + " (" + to_string(st.label) + "): ";
    try {
      if (x && abs.find(*x)) {
        const auto g = fired_branch(st.label);
        if (!g) throw Error("consumes a tracked contract without firing a branch");
        const AbsGuarded ab = abstract_guarded(*g, observers, spec);
        const auto names = introduced_names(*prev, st.config);
        AbsMove m = abs_fire(abs, *x, ab, eqs, &names);
        if (m.introduced.size() != names.size())
          throw Error("abstract move introduced " + std::to_string(m.introduced.size()) +
                      " terms, the concrete step " + std::to_string(names.size()));
        abs = std::move(m.next);
        ++out.abstract_moves;
      }
      const auto expected_names = descendants(prefix, {observed});
      if (term_names(abs) != expected_names)
        throw Error("abstract names " + join(term_names(abs)) + " but descendants " +
                    join(expected_names));
      const AbsConfig expected = abstract_config(st.config, observers, expected_names, spec);
      const std::string got = shape(abs, observed), want = shape(expected, observed);
      if (got != want) throw Error("abstract state " + got + " but abstraction " + want);
    } catch (const Error& e) {
      out.failure = where + e.what();
      return out;
    }
    prev = &st.config;
  }
  return out;
}

CorrespondenceReport check_over_approximation(const ContractSpec& spec,
                                              const std::set<Participant>& observers,
                                              std::size_t runs, std::size_t depth,
                                              std::uint64_t seed) {
  CorrespondenceReport rep;
  std::mt19937_64 rng(seed);
  std::vector<std::string> secrets;
  for (const auto& a : spec.root.pre)
    if (a.kind == PreAtom::Kind::Secret) secrets.push_back(a.secret);

  for (std::size_t r = 0; r < runs; ++r) {
    std::map<std::string, std::optional<Integer>> values;
    for (const auto& s : secrets) values[s] = Integer(rng() % 3);
    const Stipulation stip = stipulate_root(spec, values);

    Policy policy;
    switch (r % 3) {
      case 0: break;
      case 1: policy.kind = Policy::Kind::Progress; break;
      case 2:
        policy.kind = Policy::Kind::Only;
        policy.only = observers;
        break;
    }
    policy.deposit_moves = r % 2 == 0;
    const std::size_t d = 1 + rng() % depth;
    const Run run = random_run(stip.run.last(), spec, d, rng(), policy);
    const RunMatch m = match_run(run, stip.contract, observers, spec);
    ++rep.trials;
    rep.steps += run.steps.size();
    rep.matched += m.abstract_moves;
    if (m.failure)
      rep.failures.push_back("run " + std::to_string(r) + " (" + policy.name() + "): " + *m.failure);
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

void catalog_contract(const Contract& c, const std::set<Participant>& observers,
                      const ContractSpec& spec, std::map<std::string, Contract>& out) {
  out.emplace(abstract_contract(c, observers, spec).key(), c);
  for (const auto& g : c.branches()) {
    if (g->kind == GuardedNode::Kind::Put) catalog_contract(g->cont, observers, spec, out);
    for (const auto& p : g->parts) catalog_contract(p.body, observers, spec, out);
  }
}

}  // namespace

Catalog::Catalog(const ContractSpec& spec, const std::set<Participant>& observers) {
  catalog_contract(evaluate_contract(spec.root.contract, {}), observers, spec, by_key_);
  for (const auto& [name, eq] : spec.equations) {
    Env env;
    for (const auto& p : eq.params) env[p] = 1;
    catalog_contract(evaluate_contract(eq.body.contract, env), observers, spec, by_key_);
  }
}

const Contract* Catalog::find(const std::string& abs_key) const {
  auto it = by_key_.find(abs_key);
  return it == by_key_.end() ? nullptr : &it->second;
}

std::pair<Configuration, std::vector<std::string>> realize_state(const AbsConfig& state,
                                                                 const Catalog& catalog,
                                                                 const ContractSpec& spec) {
  Configuration cfg;
  std::vector<std::string> names;
  for (const auto& t : state.terms) {
    const Contract* c = catalog.find(t.term.key());
    if (!c) throw Error("no concrete contract abstracts to " + t.term.key());
    const std::string x = cfg.names.fresh("c");
    cfg.contracts.push_back({x, *c, Rational(1)});
    names.push_back(x);
  }
  for (const auto& [s, owner] : spec.secret_owners())
    cfg.committed.push_back({owner, s, Integer(0)});
  return {std::move(cfg), std::move(names)};
}

std::vector<Label> realize_move(const Configuration& cfg, const std::string& x,
                                const AbsGuarded& abs_branch,
                                const std::set<Participant>& observers,
                                const ContractSpec& spec) {
  const ActiveContract* c = cfg.find_contract(x);
  if (!c) throw Error("no contract " + x);
  Guarded g;
  for (const auto& b : c->contract.branches())
    if (abstract_guarded(b, observers, spec)->key == abs_branch->key) g = b;
  if (!g) throw Error("no branch of " + x + " abstracts to " + abs_branch->key);

  std::vector<Label> out;
  Integer deadline = cfg.time;
  for (const auto& t : g->afters) deadline = std::max(deadline, eval_static(t, {}));
  if (deadline > cfg.time) out.push_back(label::Delay{deadline - cfg.time});
  for (const auto& p : g->auths) out.push_back(label::AuthBranch{p, x, g});
  if (g->kind == GuardedNode::Kind::Put) {
    for (const auto& s : g->secrets) {
      const bool revealed = std::any_of(cfg.revealed.begin(), cfg.revealed.end(),
                                        [&](const RevealedSecret& r) { return r.secret == s; });
      if (revealed) continue;
      auto it = std::find_if(cfg.committed.begin(), cfg.committed.end(),
                             [&](const CommittedSecret& k) { return k.secret == s; });
      if (it == cfg.committed.end()) throw Error("secret " + s + " is not committed");
      out.push_back(label::AuthRev{it->owner, s});
    }
  }
  switch (g->kind) {
    case GuardedNode::Kind::Withdraw: out.push_back(label::Withdraw{g->to, c->value, x, g}); break;
    case GuardedNode::Kind::Split: out.push_back(label::Split{x, g}); break;
    case GuardedNode::Kind::Put: out.push_back(label::Rev{x, g}); break;
    case GuardedNode::Kind::Rngt: throw Error("renegotiation is never an observer-only move");
  }
  return out;
}

namespace {

struct UnderChecker {
  const StateSpace& space;
  const ContractSpec& spec;
  const std::set<Participant>& observers;
  std::size_t max_len;
  CorrespondenceReport& rep;
  std::size_t state = 0;

  /// abs and cfg agree and use the same names.
  void explore(const AbsConfig& abs, const Configuration& cfg, std::vector<std::string>& path) {
    if (path.size() >= max_len) return;
    for (const auto& m0 : abs_enabled(abs, space.equations)) {
      if (m0.label.starred) continue;
      const std::string step = "[" + m0.label.target + "] " + m0.branch->key;
      path.push_back(step);
      ++rep.trials;
      try {
        Configuration next = cfg;
        const auto labels = realize_move(cfg, m0.label.target, m0.branch, observers, spec);
        for (const auto& l : labels) {
          if (!in_label_set(l, observers))
            throw Error("label " + to_string(l) + " is outside the observers' label set");
          next = apply_step(next, l, spec);
          ++rep.steps;
        }
        const auto names = introduced_names(cfg, next);
        AbsMove m = abs_fire(abs, m0.label.target, m0.branch, space.equations, &names);
        ++rep.matched;
        std::set<std::string> tracked = term_names(m.next);
        if (tracked != next.contract_names())
          throw Error("abstract names " + join(tracked) + " but concrete " +
                      join(next.contract_names()));
        const AbsConfig again = abstract_config(next, observers, tracked, spec);
        const std::string got = shape(again, kRootOrigin), want = shape(m.next, kRootOrigin);
        if (got != want) throw Error("re-abstraction " + got + " but abstract move gives " + want);
        explore(m.next, next, path);
      } catch (const Error& e) {
        std::string p;
        for (const auto& s : path) p += " " + s;
        rep.failures.push_back("state " + std::to_string(state) + ", path" + p + ": " + e.what());
      }
      path.pop_back();
    }
  }
};

}  // namespace

CorrespondenceReport check_under_approximation(const StateSpace& space, const ContractSpec& spec,
                                               const std::set<Participant>& observers,
                                               std::size_t max_len) {
  CorrespondenceReport rep;
  const Catalog catalog(spec, observers);
  UnderChecker u{space, spec, observers, max_len, rep};
  for (std::size_t s = 0; s < space.states.size(); ++s) {
    u.state = s;
    try {
      auto [cfg, names] = realize_state(space.states[s], catalog, spec);
      AbsConfig abs;
      for (std::size_t i = 0; i < names.size(); ++i) {
        abs.terms.push_back(space.states[s].terms[i]);
        abs.terms.back().name = names[i];
      }
      abs.tokens = space.states[s].tokens;
      std::vector<std::string> path;
      u.explore(abs, cfg, path);
    } catch (const Error& e) {
      rep.failures.push_back("state " + std::to_string(s) + ": " + e.what());
    }
  }
  return rep;
}

}  // namespace bitml
