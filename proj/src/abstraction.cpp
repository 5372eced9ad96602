#include "bitml/abstraction.hpp"

#include <algorithm>

namespace bitml {

namespace {

std::shared_ptr<AbsGuardedNode> copy_node(const AbsGuardedNode& n) {
  return std::make_shared<AbsGuardedNode>(n);
}

std::string action_key(const AbsGuardedNode& n) {
  switch (n.kind) {
    case AbsGuardedNode::Kind::Withdraw:
      return "withdraw " + n.to.value;
    case AbsGuardedNode::Kind::Tau:
      return "tau.(" + n.cont.key() + ")";
    case AbsGuardedNode::Kind::Split: {
      std::vector<std::string> ks;
      for (const auto& p : n.parts) ks.push_back("(" + p.key() + ")");
      std::sort(ks.begin(), ks.end());
      std::string k = "split(";
      for (std::size_t i = 0; i < ks.size(); ++i) k += (i ? " | " : "") + ks[i];
      return k + ")";
    }
    case AbsGuardedNode::Kind::Rngt:
      return "rngt " + n.var;
  }
  return "";
}

AbsGuarded finish(std::shared_ptr<AbsGuardedNode> n) {
  n->key = (n->starred ? "*" : "") + action_key(*n);
  return n;
}

class Abstractor {
 public:
  Abstractor(const std::set<Participant>& observers, const ContractSpec& spec)
      : observers_(observers), owners_(spec.secret_owners()) {}

  AbsContract contract(const Contract& c) {
    std::vector<AbsGuarded> bs;
    for (const auto& g : c.branches()) bs.push_back(guarded(g));
    return AbsContract(std::move(bs));
  }

  AbsGuarded guarded(const Guarded& g) {
    AbsGuarded out;
    switch (g->kind) {
      case GuardedNode::Kind::Withdraw:
        out = abs_withdraw(g->to);
        break;
      case GuardedNode::Kind::Put: {
        out = abs_tau(contract(g->cont));
        bool known = is_true(g->pred);
        for (const auto& s : g->secrets) known = known && observed(s);
        if (!known) out = star(out);
        break;
      }
      case GuardedNode::Kind::Split: {
        std::vector<AbsContract> parts;
        for (const auto& p : g->parts) parts.push_back(contract(p.body));
        out = abs_split(std::move(parts));
        break;
      }
      case GuardedNode::Kind::Rngt:
        out = abs_rngt(g->var);
        break;
    }
    for (const auto& p : g->auths)
      if (!observers_.count(p)) out = star(out);
    return out;
  }

 private:
  bool observed(const std::string& secret) const {
    const auto owner = owner_of_secret(owners_, secret);
    return owner && observers_.count(*owner) > 0;
  }

  const std::set<Participant>& observers_;
  std::map<std::string, Participant> owners_;
};

}  // namespace

AbsContract::AbsContract() {
  static const std::shared_ptr<const Node> empty = [] {
    auto n = std::make_shared<Node>();
    n->key = "0";
    return std::shared_ptr<const Node>(n);
  }();
  node_ = empty;
}

AbsContract::AbsContract(std::vector<AbsGuarded> branches) {
  std::stable_sort(branches.begin(), branches.end(),
                   [](const AbsGuarded& a, const AbsGuarded& b) { return a->key < b->key; });
  auto n = std::make_shared<Node>();
  if (branches.empty()) n->key = "0";
  for (std::size_t i = 0; i < branches.size(); ++i) n->key += (i ? " + " : "") + branches[i]->key;
  n->branches = std::move(branches);
  node_ = n;
}

AbsGuarded abs_withdraw(const Participant& to) {
  auto n = std::make_shared<AbsGuardedNode>();
  n->kind = AbsGuardedNode::Kind::Withdraw;
  n->to = to;
  return finish(n);
}

AbsGuarded abs_tau(AbsContract cont) {
  auto n = std::make_shared<AbsGuardedNode>();
  n->kind = AbsGuardedNode::Kind::Tau;
  n->cont = std::move(cont);
  return finish(n);
}

AbsGuarded abs_split(std::vector<AbsContract> parts) {
  auto n = std::make_shared<AbsGuardedNode>();
  n->kind = AbsGuardedNode::Kind::Split;
  n->parts = std::move(parts);
  return finish(n);
}

AbsGuarded abs_rngt(const std::string& var) {
  auto n = std::make_shared<AbsGuardedNode>();
  n->kind = AbsGuardedNode::Kind::Rngt;
  n->var = var;
  return finish(n);
}

AbsGuarded star(const AbsGuarded& g) {
  if (g->starred) return g;
  auto n = copy_node(*g);
  n->starred = true;
  return finish(n);
}

std::set<std::string> observer_secrets(const ContractSpec& spec,
                                       const std::set<Participant>& observers) {
  std::set<std::string> out;
  for (const auto& [s, owner] : spec.secret_owners())
    if (observers.count(owner)) out.insert(s);
  return out;
}

AbsGuarded abstract_guarded(const Guarded& g, const std::set<Participant>& observers,
                            const ContractSpec& spec) {
  return Abstractor(observers, spec).guarded(g);
}

AbsContract abstract_contract(const Contract& c, const std::set<Participant>& observers,
                              const ContractSpec& spec) {
  return Abstractor(observers, spec).contract(c);
}

AbsEquations abstract_equations(const ContractSpec& spec,
                                const std::set<Participant>& observers) {
  Abstractor a(observers, spec);
  AbsEquations out;
  for (const auto& [name, eq] : spec.equations) out[name] = a.contract(eq.body.contract);
  return out;
}

const AbsTerm* AbsConfig::find(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return &t;
  return nullptr;
}

AbsConfig abstract_config(const Configuration& cfg, const std::set<Participant>& observers,
                          const std::set<std::string>& xs, const ContractSpec& spec) {
  Abstractor a(observers, spec);
  AbsConfig out;
  for (const auto& c : cfg.contracts)
    if (xs.count(c.name)) out.terms.push_back({c.name, c.name, a.contract(c.contract)});
  return out;
}

AbsMove abs_fire(const AbsConfig& cfg, const std::string& name, const AbsGuarded& branch,
                 const AbsEquations& eqs, const std::vector<std::string>* names) {
  auto it = std::find_if(cfg.terms.begin(), cfg.terms.end(),
                         [&](const AbsTerm& t) { return t.name == name; });
  if (it == cfg.terms.end()) throw Error("no abstract term " + name);
  const auto& bs = it->term.branches();
  if (std::none_of(bs.begin(), bs.end(),
                   [&](const AbsGuarded& b) { return b->key == branch->key; }))
    throw Error("branch " + branch->key + " not in term " + name);

  AbsMove m;
  m.branch = branch;
  m.label = {name, branch->starred || branch->kind == AbsGuardedNode::Kind::Rngt};
  m.next = cfg;
  const std::string origin = it->origin;
  m.next.terms.erase(m.next.terms.begin() + (it - cfg.terms.begin()));

  std::size_t used = 0;
  auto fresh = [&] {
    if (names) {
      if (used >= names->size()) throw Error("not enough names for abstract move");
      return (*names)[used++];
    }
    return m.next.fresh();
  };
  auto add = [&](const AbsContract& c) {
    std::string n = fresh();
    m.introduced.push_back(n);
    m.next.terms.push_back({n, origin, c});
  };
  switch (branch->kind) {
    case AbsGuardedNode::Kind::Withdraw:
      break;
    case AbsGuardedNode::Kind::Tau:
      add(branch->cont);
      break;
    case AbsGuardedNode::Kind::Split:
      for (const auto& p : branch->parts) add(p);
      break;
    case AbsGuardedNode::Kind::Rngt: {
      auto eq = eqs.find(branch->var);
      if (eq == eqs.end()) throw UnknownEquation(branch->var);
      add(eq->second);
      m.next.tokens.insert(branch->var);
      break;
    }
  }
  return m;
}

std::vector<AbsMove> abs_enabled(const AbsConfig& cfg, const AbsEquations& eqs) {
  std::vector<AbsMove> out;
  for (const auto& t : cfg.terms) {
    const AbsGuarded* prev = nullptr;
    for (const auto& b : t.term.branches()) {
      // Identical branches give identical moves.
      if (prev && (*prev)->key == b->key) continue;
      prev = &b;
      out.push_back(abs_fire(cfg, t.name, b, eqs));
    }
  }
  return out;
}

std::vector<AbsMove> fin_enabled(const AbsConfig& cfg, const AbsEquations& eqs) {
  auto moves = abs_enabled(cfg, eqs);
  std::erase_if(moves, [&](const AbsMove& m) {
    return m.branch->kind == AbsGuardedNode::Kind::Rngt && cfg.tokens.count(m.branch->var) > 0;
  });
  return moves;
}

CanonicalState canonicalize(const AbsConfig& cfg) {
  CanonicalState s;
  for (const auto& t : cfg.terms) s.terms.push_back({t.origin, t.term.key()});
  std::sort(s.terms.begin(), s.terms.end());
  s.tokens.assign(cfg.tokens.begin(), cfg.tokens.end());
  for (const auto& [o, k] : s.terms) s.text += "<" + k + ">@" + o + " ";
  s.text += "|";
  for (const auto& t : s.tokens) s.text += " " + t;
  s.digest = fnv1a(s.text);
  return s;
}

std::size_t canonical_slot(const AbsConfig& cfg, const std::string& name) {
  std::vector<std::tuple<std::string, std::string, std::string>> order;
  for (const auto& t : cfg.terms) order.emplace_back(t.origin, t.term.key(), t.name);
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i)
    if (std::get<2>(order[i]) == name) return i;
  throw Error("no abstract term " + name);
}

std::size_t abs_depth(const AbsContract& c) {
  std::size_t d = 0;
  for (const auto& b : c.branches()) {
    std::size_t inner = 0;
    if (b->kind == AbsGuardedNode::Kind::Tau) inner = abs_depth(b->cont);
    for (const auto& p : b->parts) inner = std::max(inner, abs_depth(p));
    d = std::max(d, inner + 1);
  }
  return d;
}

}  // namespace bitml
