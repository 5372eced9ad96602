#include "bitml/ast.hpp"

#include <algorithm>
#include <functional>

namespace bitml {

namespace {

using StaticMap = std::function<StaticExpr(const StaticExpr&)>;
using NameMap = std::function<std::string(const std::string&)>;

ArithExpr map_arith(const ArithExpr& e, const StaticMap& fs, const NameMap& fn) {
  switch (e->kind) {
    case ArithNode::Kind::Static: return astatic(fs(e->sexpr));
    case ArithNode::Kind::Secret: return asecret(fn(e->secret));
    case ArithNode::Kind::Add: return aadd(map_arith(e->lhs, fs, fn), map_arith(e->rhs, fs, fn));
    case ArithNode::Kind::Sub: return asub(map_arith(e->lhs, fs, fn), map_arith(e->rhs, fs, fn));
  }
  return e;
}

Predicate map_pred(const Predicate& p, const StaticMap& fs, const NameMap& fn) {
  switch (p->kind) {
    case PredNode::Kind::True: return p;
    case PredNode::Kind::And: return pand(map_pred(p->p, fs, fn), map_pred(p->q, fs, fn));
    case PredNode::Kind::Not: return pnot(map_pred(p->p, fs, fn));
    case PredNode::Kind::Eq: return peq(map_arith(p->lhs, fs, fn), map_arith(p->rhs, fs, fn));
    case PredNode::Kind::Lt: return plt(map_arith(p->lhs, fs, fn), map_arith(p->rhs, fs, fn));
  }
  return p;
}

Contract map_contract(const Contract& c, const StaticMap& fs, const NameMap& fn) {
  std::vector<Guarded> out;
  out.reserve(c.branches().size());
  for (const auto& g : c.branches()) {
    Guarded core;
    switch (g->kind) {
      case GuardedNode::Kind::Withdraw:
        core = gwithdraw(g->to);
        break;
      case GuardedNode::Kind::Put: {
        std::vector<std::string> secrets;
        for (const auto& s : g->secrets) secrets.push_back(fn(s));
        core = gput(std::move(secrets), map_pred(g->pred, fs, fn), map_contract(g->cont, fs, fn));
        break;
      }
      case GuardedNode::Kind::Split: {
        std::vector<SplitBranch> parts;
        for (const auto& p : g->parts) parts.push_back({p.weight, map_contract(p.body, fs, fn)});
        core = gsplit(std::move(parts));
        break;
      }
      case GuardedNode::Kind::Rngt: {
        std::vector<StaticExpr> args;
        for (const auto& a : g->args) args.push_back(fs(a));
        core = grngt(g->var, std::move(args));
        break;
      }
    }
    std::vector<StaticExpr> afters;
    for (const auto& t : g->afters) afters.push_back(fs(t));
    out.push_back(with_decorations(core, g->auths, std::move(afters)));
  }
  return Contract(std::move(out));
}

StaticExpr identity_static(const StaticExpr& e) { return e; }
std::string identity_name(const std::string& s) { return s; }

std::string render_set(const std::set<Participant>& ps) {
  std::string s = "{";
  bool first = true;
  for (const auto& p : ps) {
    if (!first) s += ",";
    s += p.value;
    first = false;
  }
  return s + "}";
}

struct Checker {
  const Advertisement& adv;
  const Equations& equations;
  AdvertRole role;
  std::set<std::string> params;
  std::set<std::string> declared_secrets;
  std::set<Participant> deciders;
  std::vector<Violation> out;

  void add(int clause, std::string msg, std::string loc) {
    out.push_back({clause, std::move(msg), std::move(loc)});
  }

  void check_static(const StaticExpr& e, const std::string& loc) {
    std::set<std::string> fv;
    free_vars(e, fv);
    for (const auto& v : fv)
      if (!params.count(v)) add(0, "unbound variable " + v, loc);
  }

  void check_arith(const ArithExpr& e, const std::string& loc) {
    if (e->kind == ArithNode::Kind::Static) {
      check_static(e->sexpr, loc);
    } else if (e->kind == ArithNode::Kind::Add || e->kind == ArithNode::Kind::Sub) {
      check_arith(e->lhs, loc);
      check_arith(e->rhs, loc);
    }
  }

  void check_pred(const Predicate& p, const std::string& loc) {
    switch (p->kind) {
      case PredNode::Kind::True: return;
      case PredNode::Kind::And:
        check_pred(p->p, loc);
        check_pred(p->q, loc);
        return;
      case PredNode::Kind::Not: check_pred(p->p, loc); return;
      default:
        check_arith(p->lhs, loc);
        check_arith(p->rhs, loc);
    }
  }

  void contract(const Contract& c) {
    for (const auto& g : c.branches()) guarded(g);
  }

  void guarded(const Guarded& g) {
    const std::string& loc = g->key;
    for (const auto& a : g->auths) deciders.insert(a);
    for (const auto& t : g->afters) check_static(t, loc);
    switch (g->kind) {
      case GuardedNode::Kind::Withdraw: break;
      case GuardedNode::Kind::Put: {
        std::set<std::string> seen;
        for (const auto& s : g->secrets) {
          if (!seen.insert(s).second) add(0, "secret " + s + " revealed twice", loc);
          if (!declared_secrets.count(s)) add(2, "secret " + s + " not in precondition", loc);
        }
        std::set<std::string> used;
        pred_secrets(g->pred, used);
        for (const auto& s : used) {
          if (!seen.count(s)) add(0, "predicate secret " + s + " is not revealed by the put", loc);
          if (!declared_secrets.count(s) && seen.count(s) == 0)
            add(2, "secret " + s + " not in precondition", loc);
        }
        check_pred(g->pred, loc);
        contract(g->cont);
        break;
      }
      case GuardedNode::Kind::Split: {
        Rational total = 0;
        for (const auto& p : g->parts) {
          if (p.weight < 0) add(0, "negative split weight " + to_string(p.weight), loc);
          total += p.weight;
        }
        if (g->parts.empty()) add(0, "split without branches", loc);
        else if (total <= 0) add(0, "split weights sum to zero", loc);
        for (const auto& p : g->parts) contract(p.body);
        break;
      }
      case GuardedNode::Kind::Rngt: {
        for (const auto& a : g->args) check_static(a, loc);
        auto it = equations.find(g->var);
        if (it == equations.end()) {
          add(4, "unknown recursion variable " + g->var, loc);
          break;
        }
        if (it->second.params.size() != g->args.size()) {
          add(4,
              "recursion variable " + g->var + " expects " +
                  std::to_string(it->second.params.size()) + " argument(s), got " +
                  std::to_string(g->args.size()),
              loc);
        }
        const auto mine = pre_participants(adv.pre);
        const auto theirs = pre_participants(it->second.body.pre);
        if (mine != theirs) {
          add(4,
              "participant set mismatch: " + g->var + " mentions " + render_set(theirs) +
                  " but the advertisement mentions " + render_set(mine),
              loc);
        }
        break;
      }
    }
  }

  void run() {
    std::set<std::string> refs;
    for (const auto& a : adv.pre) {
      const std::string loc = key_of(a);
      if (a.kind == PreAtom::Kind::Secret) {
        if (!declared_secrets.insert(a.secret).second)
          add(0, "duplicate secret " + a.secret, loc);
      } else {
        if (a.value < 0) add(0, "negative deposit value " + to_string(a.value), loc);
        if (!refs.insert(a.ref.name).second)
          add(0, "duplicate deposit reference " + a.ref.name, loc);
      }
    }
    contract(adv.contract);

    if (role == AdvertRole::Stipulation) {
      std::set<Participant> depositors;
      for (const auto& a : adv.pre)
        if (a.kind == PreAtom::Kind::Deposit) depositors.insert(a.owner);
      std::set<Participant> involved = pre_participants(adv.pre);
      involved.insert(deciders.begin(), deciders.end());
      for (const auto& p : involved)
        if (!depositors.count(p))
          add(3, "participant " + p.value + " has no deposit in the precondition", "pre");
    }
  }
};

}  // namespace

std::vector<Violation> check_advertisement(const Advertisement& adv, const Equations& equations,
                                           AdvertRole role,
                                           const std::vector<std::string>& params) {
  Checker c{adv, equations, role, {params.begin(), params.end()}, {}, {}, {}};
  c.run();
  return c.out;
}

namespace {

void collect_contract_participants(const Contract& c, std::set<Participant>& out) {
  for (const auto& g : c.branches()) {
    out.insert(g->auths.begin(), g->auths.end());
    if (g->kind == GuardedNode::Kind::Withdraw) out.insert(g->to);
    if (g->kind == GuardedNode::Kind::Put) collect_contract_participants(g->cont, out);
    if (g->kind == GuardedNode::Kind::Split)
      for (const auto& p : g->parts) collect_contract_participants(p.body, out);
  }
}

}  // namespace

std::vector<Violation> check_spec(const ContractSpec& spec) {
  std::vector<Violation> out;
  const std::set<Participant> declared(spec.participants.begin(), spec.participants.end());
  if (declared.size() != spec.participants.size())
    out.push_back({0, "duplicate participant", "participants"});
  for (const auto& h : spec.honest)
    if (!declared.count(h))
      out.push_back({0, "honest participant " + h.value + " is not a participant", "honest"});

  std::map<std::string, Participant> owners;
  auto check_owners = [&](const Precondition& pre, const std::string& where) {
    for (const auto& a : pre) {
      if (!declared.count(a.owner))
        out.push_back({0, "unknown participant " + a.owner.value, where});
      if (a.kind != PreAtom::Kind::Secret) continue;
      auto [it, fresh] = owners.emplace(a.secret, a.owner);
      if (!fresh && it->second != a.owner)
        out.push_back({0,
                       "secret " + a.secret + " owned by both " + it->second.value + " and " +
                           a.owner.value,
                       where});
    }
  };
  auto check_mentions = [&](const Contract& c, const std::string& where) {
    std::set<Participant> mentioned;
    collect_contract_participants(c, mentioned);
    for (const auto& p : mentioned)
      if (!declared.count(p)) out.push_back({0, "unknown participant " + p.value, where});
  };

  check_owners(spec.root.pre, "main");
  check_mentions(spec.root.contract, "main");
  for (auto v : check_advertisement(spec.root, spec.equations, AdvertRole::Stipulation)) {
    v.location = "main: " + v.location;
    out.push_back(std::move(v));
  }
  for (const auto& name : spec.equation_order) {
    const auto& eq = spec.equations.at(name);
    const std::string where = "define " + name;
    check_owners(eq.body.pre, where);
    check_mentions(eq.body.contract, where);
    for (auto v : check_advertisement(eq.body, spec.equations, AdvertRole::EquationBody,
                                      eq.params)) {
      v.location = where + ": " + v.location;
      out.push_back(std::move(v));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Contract evaluate_contract(const Contract& c, const Env& env) {
  return map_contract(
      c, [&](const StaticExpr& e) { return sconst(eval_static(e, env)); }, identity_name);
}

Contract rename_secrets(const Contract& c, const std::map<std::string, std::string>& ren) {
  return map_contract(c, identity_static, [&](const std::string& s) {
    auto it = ren.find(s);
    return it == ren.end() ? s : it->second;
  });
}

Advertisement instantiate_equation(const std::string& var, const std::vector<Integer>& args,
                                   const Equations& equations, NameSource& fresh) {
  auto it = equations.find(var);
  if (it == equations.end()) throw UnknownEquation(var);
  const Equation& eq = it->second;
  if (eq.params.size() != args.size()) throw ArityMismatch(var, eq.params.size(), args.size());

  Env env;
  for (std::size_t i = 0; i < args.size(); ++i) env[eq.params[i]] = args[i];

  std::map<std::string, std::string> ren;
  Advertisement out;
  for (const auto& a : eq.body.pre) {
    PreAtom b = a;
    if (a.kind == PreAtom::Kind::Secret) {
      b.secret = fresh.fresh(base_name(a.secret));
      ren[a.secret] = b.secret;
    } else if (a.ref.is_var) {
      b.ref.name = fresh.fresh(base_name(a.ref.name));
    }
    out.pre.push_back(std::move(b));
  }
  out.contract = rename_secrets(evaluate_contract(eq.body.contract, env), ren);
  return out;
}

std::string alpha_key(const Advertisement& adv) {
  std::map<std::string, std::string> ren;
  Precondition pre;
  std::size_t ns = 0, nv = 0;
  for (const auto& a : adv.pre) {
    PreAtom b = a;
    if (a.kind == PreAtom::Kind::Secret) {
      auto [it, fresh] = ren.emplace(a.secret, "$s" + std::to_string(ns));
      if (fresh) ++ns;
      b.secret = it->second;
    } else if (a.ref.is_var) {
      b.ref.name = "$v" + std::to_string(nv++);
    }
    pre.push_back(std::move(b));
  }
  Advertisement canon{std::move(pre), rename_secrets(adv.contract, ren), adv.renegotiates};
  return key_of(canon);
}

bool alpha_equiv(const Advertisement& a, const Advertisement& b) {
  return alpha_key(a) == alpha_key(b);
}

}  // namespace bitml
