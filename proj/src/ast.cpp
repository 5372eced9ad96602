#include "bitml/ast.hpp"

#include <algorithm>

namespace bitml {

namespace {

const char* op_symbol(StaticNode::Kind k) {
  switch (k) {
    case StaticNode::Kind::Add: return "+";
    case StaticNode::Kind::Sub: return "-";
    case StaticNode::Kind::Mul: return "*";
    default: return "?";
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Static expressions

StaticExpr sconst(const Integer& k) {
  auto n = std::make_shared<StaticNode>();
  n->kind = StaticNode::Kind::Const;
  n->value = k;
  n->key = k.str();
  return n;
}

StaticExpr svar(const std::string& name) {
  auto n = std::make_shared<StaticNode>();
  n->kind = StaticNode::Kind::Var;
  n->var = name;
  n->key = name;
  return n;
}

StaticExpr sbin(StaticNode::Kind op, StaticExpr lhs, StaticExpr rhs) {
  auto n = std::make_shared<StaticNode>();
  n->kind = op;
  n->key = std::string("(") + op_symbol(op) + " " + lhs->key + " " + rhs->key + ")";
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

Integer eval_static(const StaticExpr& e, const Env& env) {
  switch (e->kind) {
    case StaticNode::Kind::Const:
      return e->value;
    case StaticNode::Kind::Var: {
      auto it = env.find(e->var);
      if (it == env.end()) throw UnboundVariable(e->var);
      return it->second;
    }
    case StaticNode::Kind::Add:
      return eval_static(e->lhs, env) + eval_static(e->rhs, env);
    case StaticNode::Kind::Sub:
      return eval_static(e->lhs, env) - eval_static(e->rhs, env);
    case StaticNode::Kind::Mul:
      return eval_static(e->lhs, env) * eval_static(e->rhs, env);
  }
  return 0;
}

void free_vars(const StaticExpr& e, std::set<std::string>& out) {
  if (e->kind == StaticNode::Kind::Var) {
    out.insert(e->var);
  } else if (e->kind != StaticNode::Kind::Const) {
    free_vars(e->lhs, out);
    free_vars(e->rhs, out);
  }
}

// ---------------------------------------------------------------------------
// Arithmetic over secrets

ArithExpr astatic(StaticExpr e) {
  auto n = std::make_shared<ArithNode>();
  n->kind = ArithNode::Kind::Static;
  n->key = e->key;
  n->sexpr = std::move(e);
  return n;
}

ArithExpr asecret(const std::string& name) {
  auto n = std::make_shared<ArithNode>();
  n->kind = ArithNode::Kind::Secret;
  n->secret = name;
  n->key = name;
  return n;
}

namespace {

ArithExpr abin(ArithNode::Kind op, ArithExpr lhs, ArithExpr rhs) {
  if (lhs->kind == ArithNode::Kind::Static && rhs->kind == ArithNode::Kind::Static) {
    auto sop = op == ArithNode::Kind::Add ? StaticNode::Kind::Add : StaticNode::Kind::Sub;
    return astatic(sbin(sop, lhs->sexpr, rhs->sexpr));
  }
  auto n = std::make_shared<ArithNode>();
  n->kind = op;
  n->key = std::string("(") + (op == ArithNode::Kind::Add ? "+" : "-") + " " + lhs->key +
           " " + rhs->key + ")";
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

}  // namespace

ArithExpr aadd(ArithExpr lhs, ArithExpr rhs) {
  return abin(ArithNode::Kind::Add, std::move(lhs), std::move(rhs));
}

ArithExpr asub(ArithExpr lhs, ArithExpr rhs) {
  return abin(ArithNode::Kind::Sub, std::move(lhs), std::move(rhs));
}

Integer eval_arith(const ArithExpr& e, const Revealed& revealed) {
  switch (e->kind) {
    case ArithNode::Kind::Static:
      return eval_static(e->sexpr, {});
    case ArithNode::Kind::Secret: {
      auto it = revealed.find(e->secret);
      if (it == revealed.end()) throw UnrevealedSecret(e->secret);
      return it->second;
    }
    case ArithNode::Kind::Add:
      return eval_arith(e->lhs, revealed) + eval_arith(e->rhs, revealed);
    case ArithNode::Kind::Sub:
      return eval_arith(e->lhs, revealed) - eval_arith(e->rhs, revealed);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Predicates

namespace {

std::shared_ptr<PredNode> pnode(PredNode::Kind k) {
  auto n = std::make_shared<PredNode>();
  n->kind = k;
  return n;
}

}  // namespace

Predicate ptrue() {
  static const Predicate t = [] {
    auto n = pnode(PredNode::Kind::True);
    n->key = "true";
    return Predicate(n);
  }();
  return t;
}

Predicate pand(Predicate p, Predicate q) {
  auto n = pnode(PredNode::Kind::And);
  n->key = "(and " + p->key + " " + q->key + ")";
  n->p = std::move(p);
  n->q = std::move(q);
  return n;
}

Predicate pnot(Predicate p) {
  auto n = pnode(PredNode::Kind::Not);
  n->key = "(not " + p->key + ")";
  n->p = std::move(p);
  return n;
}

Predicate peq(ArithExpr lhs, ArithExpr rhs) {
  auto n = pnode(PredNode::Kind::Eq);
  n->key = "(= " + lhs->key + " " + rhs->key + ")";
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

Predicate plt(ArithExpr lhs, ArithExpr rhs) {
  auto n = pnode(PredNode::Kind::Lt);
  n->key = "(< " + lhs->key + " " + rhs->key + ")";
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

Predicate pbetween(ArithExpr lo, ArithExpr x, ArithExpr hi) {
  return pand(pnot(plt(x, std::move(lo))), plt(x, aadd(std::move(hi), astatic(sconst(1)))));
}

bool is_true(const Predicate& p) { return p->kind == PredNode::Kind::True; }

namespace {

void arith_secrets(const ArithExpr& e, std::set<std::string>& out) {
  switch (e->kind) {
    case ArithNode::Kind::Static: return;
    case ArithNode::Kind::Secret: out.insert(e->secret); return;
    default:
      arith_secrets(e->lhs, out);
      arith_secrets(e->rhs, out);
  }
}

}  // namespace

void pred_secrets(const Predicate& p, std::set<std::string>& out) {
  switch (p->kind) {
    case PredNode::Kind::True: return;
    case PredNode::Kind::And:
      pred_secrets(p->p, out);
      pred_secrets(p->q, out);
      return;
    case PredNode::Kind::Not: pred_secrets(p->p, out); return;
    case PredNode::Kind::Eq:
    case PredNode::Kind::Lt:
      arith_secrets(p->lhs, out);
      arith_secrets(p->rhs, out);
      return;
  }
}

bool eval_pred(const Predicate& p, const Revealed& revealed) {
  switch (p->kind) {
    case PredNode::Kind::True: return true;
    case PredNode::Kind::And:
      // Both sides are evaluated so that unrevealed secrets always surface.
      {
        const bool a = eval_pred(p->p, revealed);
        const bool b = eval_pred(p->q, revealed);
        return a && b;
      }
    case PredNode::Kind::Not: return !eval_pred(p->p, revealed);
    case PredNode::Kind::Eq:
      return eval_arith(p->lhs, revealed) == eval_arith(p->rhs, revealed);
    case PredNode::Kind::Lt:
      return eval_arith(p->lhs, revealed) < eval_arith(p->rhs, revealed);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Contracts

Contract::Contract() {
  static const std::shared_ptr<const Node> empty = [] {
    auto n = std::make_shared<Node>();
    n->key = "(choice)";
    return std::shared_ptr<const Node>(n);
  }();
  node_ = empty;
}

Contract::Contract(std::vector<Guarded> branches) {
  std::stable_sort(branches.begin(), branches.end(),
                   [](const Guarded& a, const Guarded& b) { return a->key < b->key; });
  auto n = std::make_shared<Node>();
  if (branches.size() == 1) {
    n->key = branches.front()->key;
  } else {
    n->key = "(choice";
    for (const auto& g : branches) n->key += " " + g->key;
    n->key += ")";
  }
  n->branches = std::move(branches);
  node_ = n;
}

Contract choice(std::vector<Guarded> branches) { return Contract(std::move(branches)); }
Contract single(Guarded g) { return Contract(std::vector<Guarded>{std::move(g)}); }

namespace {

std::string action_key(const GuardedNode& g) {
  switch (g.kind) {
    case GuardedNode::Kind::Withdraw:
      return "(withdraw " + g.to.value + ")";
    case GuardedNode::Kind::Put: {
      std::string k = "(put (";
      for (std::size_t i = 0; i < g.secrets.size(); ++i) {
        if (i) k += " ";
        k += g.secrets[i];
      }
      k += ")";
      if (!is_true(g.pred)) k += " (if " + g.pred->key + ")";
      k += " " + g.cont.key() + ")";
      return k;
    }
    case GuardedNode::Kind::Split: {
      std::string k = "(split";
      for (const auto& b : g.parts) k += " (" + to_string(b.weight) + " -> " + b.body.key() + ")";
      return k + ")";
    }
    case GuardedNode::Kind::Rngt: {
      std::string k = "(rngt " + g.var;
      for (const auto& a : g.args) k += " " + a->key;
      return k + ")";
    }
  }
  return "";
}

Guarded finish(std::shared_ptr<GuardedNode> n) {
  std::sort(n->afters.begin(), n->afters.end(),
            [](const StaticExpr& a, const StaticExpr& b) { return a->key < b->key; });
  n->afters.erase(std::unique(n->afters.begin(), n->afters.end(),
                              [](const StaticExpr& a, const StaticExpr& b) {
                                return a->key == b->key;
                              }),
                  n->afters.end());
  std::string k = action_key(*n);
  for (auto it = n->afters.rbegin(); it != n->afters.rend(); ++it)
    k = "(after " + (*it)->key + " " + k + ")";
  for (auto it = n->auths.rbegin(); it != n->auths.rend(); ++it)
    k = "(auth " + it->value + " " + k + ")";
  n->key = std::move(k);
  return n;
}

}  // namespace

Guarded gwithdraw(const Participant& to) {
  auto n = std::make_shared<GuardedNode>();
  n->kind = GuardedNode::Kind::Withdraw;
  n->to = to;
  return finish(n);
}

Guarded gput(std::vector<std::string> secrets, Predicate pred, Contract cont) {
  auto n = std::make_shared<GuardedNode>();
  n->kind = GuardedNode::Kind::Put;
  n->secrets = std::move(secrets);
  n->pred = std::move(pred);
  n->cont = std::move(cont);
  return finish(n);
}

Guarded gsplit(std::vector<SplitBranch> parts) {
  auto n = std::make_shared<GuardedNode>();
  n->kind = GuardedNode::Kind::Split;
  n->parts = std::move(parts);
  return finish(n);
}

Guarded grngt(const std::string& var, std::vector<StaticExpr> args) {
  auto n = std::make_shared<GuardedNode>();
  n->kind = GuardedNode::Kind::Rngt;
  n->var = var;
  n->args = std::move(args);
  return finish(n);
}

Guarded gauth(const Participant& by, const Guarded& inner) {
  auto n = std::make_shared<GuardedNode>(*inner);
  n->auths.insert(by);
  return finish(n);
}

Guarded gafter(const StaticExpr& t, const Guarded& inner) {
  auto n = std::make_shared<GuardedNode>(*inner);
  n->afters.push_back(t);
  return finish(n);
}

Guarded with_decorations(const Guarded& g, std::set<Participant> auths,
                         std::vector<StaticExpr> afters) {
  auto n = std::make_shared<GuardedNode>(*g);
  n->auths = std::move(auths);
  n->afters = std::move(afters);
  return finish(n);
}

// ---------------------------------------------------------------------------
// Preconditions

PreAtom deposit_atom(const Participant& owner, const Rational& v, DepositRef ref) {
  PreAtom a;
  a.kind = PreAtom::Kind::Deposit;
  a.owner = owner;
  a.value = v;
  a.ref = std::move(ref);
  return a;
}

PreAtom secret_atom(const Participant& owner, const std::string& secret) {
  PreAtom a;
  a.kind = PreAtom::Kind::Secret;
  a.owner = owner;
  a.secret = secret;
  return a;
}

std::set<Participant> pre_participants(const Precondition& pre) {
  std::set<Participant> out;
  for (const auto& a : pre) out.insert(a.owner);
  return out;
}

std::vector<std::string> pre_secrets(const Precondition& pre) {
  std::vector<std::string> out;
  for (const auto& a : pre)
    if (a.kind == PreAtom::Kind::Secret) out.push_back(a.secret);
  return out;
}

std::string key_of(const PreAtom& a) {
  if (a.kind == PreAtom::Kind::Secret) return "(secret " + a.owner.value + " " + a.secret + ")";
  const std::string ref = a.ref.is_var ? "(var " + a.ref.name + ")" : a.ref.name;
  return "(deposit " + a.owner.value + " " + to_string(a.value) + " " + ref + ")";
}

std::string key_of(const Precondition& pre) {
  std::string k = "(pre";
  for (const auto& a : pre) k += " " + key_of(a);
  return k + ")";
}

std::string key_of(const Advertisement& adv) {
  std::string k = adv.renegotiates ? "^" + *adv.renegotiates + " " : "";
  return k + key_of(adv.pre) + " " + adv.contract.key();
}

std::map<std::string, Participant> ContractSpec::secret_owners() const {
  std::map<std::string, Participant> out;
  auto add = [&](const Precondition& pre) {
    for (const auto& a : pre)
      if (a.kind == PreAtom::Kind::Secret) out.emplace(a.secret, a.owner);
  };
  add(root.pre);
  for (const auto& [_, eq] : equations) add(eq.body.pre);
  return out;
}

std::string base_name(const std::string& name) {
  const auto colon = name.find(':');
  return colon == std::string::npos ? name : name.substr(0, colon);
}

std::optional<Participant> owner_of_secret(const std::map<std::string, Participant>& owners,
                                           const std::string& secret) {
  auto it = owners.find(secret);
  if (it == owners.end()) it = owners.find(base_name(secret));
  if (it == owners.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Names

std::string NameSource::fresh(const std::string& cls) {
  return cls + ":" + std::to_string(next_++);
}

void NameSource::observe(const std::string& name) {
  const auto colon = name.rfind(':');
  if (colon == std::string::npos) return;
  std::uint64_t n = 0;
  const auto digits = name.substr(colon + 1);
  if (digits.empty()) return;
  for (char c : digits) {
    if (c < '0' || c > '9') return;
    n = n * 10 + static_cast<std::uint64_t>(c - '0');
  }
  if (n >= next_) next_ = n + 1;
}

// ---------------------------------------------------------------------------
// Traversals

void collect_deadlines(const Contract& c, std::set<Integer>& out) {
  for (const auto& g : c.branches()) {
    for (const auto& t : g->afters) {
      try {
        out.insert(eval_static(t, {}));
      } catch (const UnboundVariable&) {
      }
    }
    if (g->kind == GuardedNode::Kind::Put) collect_deadlines(g->cont, out);
    if (g->kind == GuardedNode::Kind::Split)
      for (const auto& p : g->parts) collect_deadlines(p.body, out);
  }
}

std::size_t contract_depth(const Contract& c) {
  std::size_t best = 0;
  for (const auto& g : c.branches()) {
    std::size_t d = 1;
    if (g->kind == GuardedNode::Kind::Put) d += contract_depth(g->cont);
    if (g->kind == GuardedNode::Kind::Split)
      for (const auto& p : g->parts) d = std::max(d, 1 + contract_depth(p.body));
    best = std::max(best, d);
  }
  return best;
}

}  // namespace bitml
