#include "bitml/concrete.hpp"

#include <algorithm>
#include <functional>

namespace bitml {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

[[noreturn]] void fail(const std::string& rule, const std::string& premise) {
  throw RuleNotEnabled(rule, premise);
}

// ---------------------------------------------------------------------------
// Lookups

std::size_t advert_index(const Configuration& cfg, const Advertisement& adv,
                         const std::string& rule) {
  const auto k = key_of(adv);
  for (std::size_t i = 0; i < cfg.adverts.size(); ++i)
    if (key_of(cfg.adverts[i]) == k) return i;
  fail(rule, "advertisement not in configuration");
}

std::size_t contract_index(const Configuration& cfg, const std::string& x,
                           const std::string& rule) {
  for (std::size_t i = 0; i < cfg.contracts.size(); ++i)
    if (cfg.contracts[i].name == x) return i;
  fail(rule, "no active contract " + x);
}

std::size_t deposit_index(const Configuration& cfg, const std::string& x,
                          const std::string& rule) {
  for (std::size_t i = 0; i < cfg.deposits.size(); ++i)
    if (cfg.deposits[i].name == x) return i;
  fail(rule, "no deposit " + x);
}

bool has_branch(const Contract& c, const Guarded& g) {
  return std::any_of(c.branches().begin(), c.branches().end(),
                     [&](const Guarded& b) { return b->key == g->key; });
}

void remove_auth(Configuration& cfg, const Authorization& a) {
  const auto k = auth_key(a);
  for (auto it = cfg.auths.begin(); it != cfg.auths.end(); ++it)
    if (auth_key(*it) == k) {
      cfg.auths.erase(it);
      return;
    }
}

void add_auth(Configuration& cfg, Authorization a, const std::string& rule) {
  if (cfg.has_auth(a)) fail(rule, "authorization already granted");
  cfg.auths.push_back(std::move(a));
}

bool secret_in_use(const Configuration& cfg, const std::string& s) {
  for (const auto& c : cfg.committed)
    if (c.secret == s) return true;
  for (const auto& r : cfg.revealed)
    if (r.secret == s) return true;
  for (const auto& adv : cfg.adverts)
    for (const auto& a : adv.pre)
      if (a.kind == PreAtom::Kind::Secret && a.secret == s) return true;
  return false;
}

bool var_in_use(const Configuration& cfg, const std::string& v) {
  for (const auto& b : cfg.bindings)
    if (b.var == v) return true;
  for (const auto& adv : cfg.adverts)
    for (const auto& a : adv.pre)
      if (a.kind == PreAtom::Kind::Deposit && a.ref.is_var && a.ref.name == v) return true;
  return false;
}

void observe_names(NameSource& names, const Advertisement& adv) {
  for (const auto& a : adv.pre) {
    if (a.kind == PreAtom::Kind::Secret) names.observe(a.secret);
    else if (a.ref.is_var) names.observe(a.ref.name);
  }
}

const Binding* find_binding(const Configuration& cfg, const Participant& owner,
                            const std::string& var) {
  for (const auto& b : cfg.bindings)
    if (b.owner == owner && b.var == var) return &b;
  return nullptr;
}

std::vector<Integer> eval_args(const Guarded& g) {
  std::vector<Integer> out;
  for (const auto& a : g->args) out.push_back(eval_static(a, {}));
  return out;
}

/// True iff adv is an instance of the rngt call in branch g of contract x.
bool instance_of_call(const Advertisement& adv, const std::string& x, const Guarded& g,
                      const ContractSpec& spec) {
  if (!adv.renegotiates || *adv.renegotiates != x) return false;
  NameSource scratch;
  Advertisement inst = instantiate_equation(g->var, eval_args(g), spec.equations, scratch);
  inst.renegotiates = x;
  return alpha_equiv(inst, adv);
}

/// The C-Branch premises for a decorated branch: authorizations and time.
/// Returns the authorizations the step consumes.
std::vector<Authorization> branch_premises(const Configuration& cfg, const std::string& x,
                                           const Guarded& g, const std::string& rule) {
  std::vector<Authorization> used;
  for (const auto& p : g->auths) {
    Authorization a{p, auth::Branch{x, g}};
    if (!cfg.has_auth(a)) fail(rule, "missing authorization of " + p.value + " on " + x);
    used.push_back(std::move(a));
  }
  for (const auto& t : g->afters)
    if (cfg.time < eval_static(t, {}))
      fail(rule, "time " + to_string(cfg.time) + " before deadline " +
                     to_string(eval_static(t, {})));
  return used;
}

struct Fired {
  Configuration cfg;
  ActiveContract consumed;
};

/// Common part of every contract move: finds x and the branch, checks the
/// C-Branch premises, removes x and the consumed authorizations.
Fired fire_branch(const Configuration& cfg, const std::string& x, const Guarded& g,
                  GuardedNode::Kind kind, const std::string& rule) {
  const auto i = contract_index(cfg, x, rule);
  if (!has_branch(cfg.contracts[i].contract, g)) fail(rule, "branch not in contract " + x);
  if (g->kind != kind) fail(rule, "branch has the wrong shape");
  auto used = branch_premises(cfg, x, g, rule);
  Fired f{cfg, cfg.contracts[i]};
  f.cfg.contracts.erase(f.cfg.contracts.begin() + static_cast<std::ptrdiff_t>(i));
  for (const auto& a : used) remove_auth(f.cfg, a);
  return f;
}

/// Premises shared by C-Init and C-Rngt. Returns the deposits, bindings and
/// authorizations to consume and their total value.
struct Stipulated {
  std::vector<std::string> deposits;
  std::vector<std::pair<Participant, std::string>> bindings;
  std::vector<Authorization> auths;
  Rational value = 0;
};

Stipulated stipulation_premises(const Configuration& cfg, const Advertisement& adv,
                                const std::string& rule) {
  Stipulated s;
  for (const auto& p : pre_participants(adv.pre)) {
    Authorization c{p, auth::Commit{adv}};
    if (!cfg.has_auth(c)) fail(rule, p.value + " has not committed");
    s.auths.push_back(std::move(c));
    if (adv.renegotiates) {
      Authorization spend{p, auth::Spend{*adv.renegotiates, adv}};
      if (!cfg.has_auth(spend))
        fail(rule, p.value + " has not authorized spending " + *adv.renegotiates);
      s.auths.push_back(std::move(spend));
    }
  }
  for (const auto& a : adv.pre) {
    if (a.kind != PreAtom::Kind::Deposit) continue;
    std::string name = a.ref.name;
    if (a.ref.is_var) {
      const Binding* b = find_binding(cfg, a.owner, a.ref.name);
      if (!b) fail(rule, "deposit variable " + a.ref.name + " is unbound");
      name = b->deposit;
      s.bindings.push_back({a.owner, a.ref.name});
    }
    const Deposit* d = cfg.find_deposit(name);
    if (!d || d->owner != a.owner || d->value != a.value)
      fail(rule, "deposit " + name + " missing");
    Authorization spend{a.owner, auth::Spend{name, adv}};
    if (!cfg.has_auth(spend)) fail(rule, a.owner.value + " has not authorized spending " + name);
    s.auths.push_back(std::move(spend));
    s.deposits.push_back(name);
    s.value += a.value;
  }
  return s;
}

void consume(Configuration& cfg, const Stipulated& s, const Advertisement& adv,
             const std::string& rule) {
  cfg.adverts.erase(cfg.adverts.begin() +
                    static_cast<std::ptrdiff_t>(advert_index(cfg, adv, rule)));
  for (const auto& d : s.deposits)
    cfg.deposits.erase(cfg.deposits.begin() +
                       static_cast<std::ptrdiff_t>(deposit_index(cfg, d, rule)));
  for (const auto& [owner, var] : s.bindings)
    std::erase_if(cfg.bindings,
                  [&](const Binding& b) { return b.owner == owner && b.var == var; });
  for (const auto& a : s.auths) remove_auth(cfg, a);
}

void check_advert_deposits(const Configuration& cfg, const Advertisement& adv,
                           const std::string& rule) {
  for (const auto& a : adv.pre) {
    if (a.kind != PreAtom::Kind::Deposit || a.ref.is_var) continue;
    const Deposit* d = cfg.find_deposit(a.ref.name);
    if (!d || d->owner != a.owner || d->value != a.value)
      fail(rule, "deposit " + a.ref.name + " missing");
  }
}

// ---------------------------------------------------------------------------
// Rules

Configuration step(const Configuration& cfg, const label::Adv& l, const ContractSpec&) {
  const std::string rule = "C-Adv";
  if (l.adv.renegotiates) fail(rule, "renegotiation advertisements use C-AdvRngt");
  const auto k = key_of(l.adv);
  for (const auto& a : cfg.adverts)
    if (key_of(a) == k) fail(rule, "advertisement already present");
  check_advert_deposits(cfg, l.adv, rule);
  for (const auto& s : pre_secrets(l.adv.pre))
    if (secret_in_use(cfg, s)) fail(rule, "secret " + s + " is not fresh");
  Configuration out = cfg;
  observe_names(out.names, l.adv);
  out.adverts.push_back(l.adv);
  return out;
}

Configuration step(const Configuration& cfg, const label::AdvRngt& l, const ContractSpec& spec) {
  const std::string rule = "C-AdvRngt";
  const auto i = contract_index(cfg, l.x, rule);
  if (!has_branch(cfg.contracts[i].contract, l.branch) ||
      l.branch->kind != GuardedNode::Kind::Rngt)
    fail(rule, "no rngt branch in contract " + l.x);
  if (!instance_of_call(l.adv, l.x, l.branch, spec))
    fail(rule, "advertisement is not an instance of " + l.branch->var);
  for (const auto& s : pre_secrets(l.adv.pre))
    if (secret_in_use(cfg, s)) fail(rule, "secret " + s + " is not fresh");
  for (const auto& a : l.adv.pre)
    if (a.kind == PreAtom::Kind::Deposit && a.ref.is_var && var_in_use(cfg, a.ref.name))
      fail(rule, "deposit variable " + a.ref.name + " is not fresh");
  for (const auto& a : cfg.adverts)
    if (a.renegotiates == l.x && instance_of_call(a, l.x, l.branch, spec))
      fail(rule, "renegotiation already advertised");
  check_advert_deposits(cfg, l.adv, rule);
  Configuration out = cfg;
  observe_names(out.names, l.adv);
  out.adverts.push_back(l.adv);
  return out;
}

Configuration step(const Configuration& cfg, const label::AuthCommit& l,
                   const ContractSpec& spec) {
  const std::string rule = "C-AuthCommit";
  const Advertisement& adv = cfg.adverts[advert_index(cfg, l.adv, rule)];
  if (!pre_participants(adv.pre).count(l.by)) fail(rule, l.by.value + " not in precondition");
  if (cfg.has_auth({l.by, auth::Commit{adv}})) fail(rule, "already committed");

  std::set<std::string> wanted, given;
  for (const auto& a : adv.pre)
    if (a.kind == PreAtom::Kind::Secret && a.owner == l.by) wanted.insert(a.secret);
  for (const auto& [s, v] : l.secrets) {
    if (!given.insert(s).second) fail(rule, "secret " + s + " given twice");
    if (!v && spec.honest.count(l.by)) fail(rule, "honest participant commits bottom");
    if (v && *v < 0) fail(rule, "negative secret value");
    for (const auto& c : cfg.committed)
      if (c.secret == s) fail(rule, "secret " + s + " already committed");
    for (const auto& r : cfg.revealed)
      if (r.secret == s) fail(rule, "secret " + s + " already revealed");
  }
  if (wanted != given) fail(rule, "commitments do not match the secrets of " + l.by.value);

  std::set<std::string> named, wanted_vars, given_vars, chosen;
  for (const auto& a : adv.pre)
    if (a.kind == PreAtom::Kind::Deposit) {
      if (!a.ref.is_var) named.insert(a.ref.name);
      else if (a.owner == l.by) wanted_vars.insert(a.ref.name);
    }
  for (const auto& [var, dep] : l.bindings) {
    if (!given_vars.insert(var).second) fail(rule, "variable " + var + " bound twice");
    if (find_binding(cfg, l.by, var)) fail(rule, "variable " + var + " already bound");
    const PreAtom* atom = nullptr;
    for (const auto& a : adv.pre)
      if (a.kind == PreAtom::Kind::Deposit && a.ref.is_var && a.ref.name == var) atom = &a;
    if (!atom || atom->owner != l.by) fail(rule, "variable " + var + " not owned by " + l.by.value);
    const Deposit* d = cfg.find_deposit(dep);
    if (!d || d->owner != l.by || d->value != atom->value)
      fail(rule, "deposit " + dep + " does not match " + var);
    if (!chosen.insert(dep).second) fail(rule, "deposit " + dep + " chosen twice");
    if (named.count(dep)) fail(rule, "deposit " + dep + " is named in the precondition");
  }
  if (wanted_vars != given_vars) fail(rule, "bindings do not match the variables of " + l.by.value);

  Configuration out = cfg;
  for (const auto& [s, v] : l.secrets) out.committed.push_back({l.by, s, v});
  for (const auto& [var, dep] : l.bindings) out.bindings.push_back({l.by, var, dep});
  out.auths.push_back({l.by, auth::Commit{adv}});
  return out;
}

Configuration step(const Configuration& cfg, const label::AuthInitDep& l, const ContractSpec&) {
  const std::string rule = "C-AuthInitDep";
  const Advertisement& adv = cfg.adverts[advert_index(cfg, l.adv, rule)];
  for (const auto& p : pre_participants(adv.pre))
    if (!cfg.has_auth({p, auth::Commit{adv}})) fail(rule, p.value + " has not committed");
  bool ok = false;
  if (adv.renegotiates && *adv.renegotiates == l.spent) {
    ok = pre_participants(adv.pre).count(l.by) && cfg.find_contract(l.spent);
  } else {
    for (const auto& a : adv.pre) {
      if (a.kind != PreAtom::Kind::Deposit || a.owner != l.by) continue;
      if (!a.ref.is_var && a.ref.name == l.spent) ok = true;
      if (a.ref.is_var) {
        const Binding* b = find_binding(cfg, l.by, a.ref.name);
        if (b && b->deposit == l.spent) ok = true;
      }
    }
  }
  if (!ok) fail(rule, l.spent + " is not a deposit of " + l.by.value + " in the precondition");
  Configuration out = cfg;
  add_auth(out, {l.by, auth::Spend{l.spent, adv}}, rule);
  return out;
}

Configuration step(const Configuration& cfg, const label::Init& l, const ContractSpec&) {
  const std::string rule = "C-Init";
  const Advertisement adv = cfg.adverts[advert_index(cfg, l.adv, rule)];
  if (adv.renegotiates) fail(rule, "renegotiation advertisements use C-Rngt");
  auto s = stipulation_premises(cfg, adv, rule);
  Configuration out = cfg;
  consume(out, s, adv, rule);
  out.contracts.push_back({out.names.fresh("c"), adv.contract, s.value});
  return out;
}

Configuration step(const Configuration& cfg, const label::Rngt& l, const ContractSpec& spec) {
  const std::string rule = "C-Rngt";
  auto f = fire_branch(cfg, l.x, l.branch, GuardedNode::Kind::Rngt, rule);
  const Advertisement adv = cfg.adverts[advert_index(cfg, l.adv, rule)];
  if (!instance_of_call(adv, l.x, l.branch, spec))
    fail(rule, "advertisement is not an instance of " + l.branch->var);
  // Premises are checked on the configuration before the branch fired, since
  // the spend authorizations for x refer to the old contract.
  auto s = stipulation_premises(cfg, adv, rule);
  consume(f.cfg, s, adv, rule);
  f.cfg.contracts.push_back({f.cfg.names.fresh("c"), adv.contract, f.consumed.value + s.value});
  return f.cfg;
}

Configuration step(const Configuration& cfg, const label::Withdraw& l, const ContractSpec&) {
  const std::string rule = "C-Withdraw";
  auto f = fire_branch(cfg, l.x, l.branch, GuardedNode::Kind::Withdraw, rule);
  if (l.branch->to != l.to) fail(rule, "withdraw recipient mismatch");
  if (f.consumed.value != l.value) fail(rule, "withdrawn value mismatch");
  f.cfg.deposits.push_back({f.cfg.names.fresh("d"), l.to, f.consumed.value});
  return f.cfg;
}

Configuration step(const Configuration& cfg, const label::Split& l, const ContractSpec&) {
  const std::string rule = "C-Split";
  auto f = fire_branch(cfg, l.x, l.branch, GuardedNode::Kind::Split, rule);
  Rational total = 0;
  for (const auto& p : l.branch->parts) total += p.weight;
  if (total <= 0) fail(rule, "split weights sum to zero");
  for (const auto& p : l.branch->parts)
    f.cfg.contracts.push_back(
        {f.cfg.names.fresh("c"), p.body, f.consumed.value * p.weight / total});
  return f.cfg;
}

Configuration step(const Configuration& cfg, const label::AuthRev& l, const ContractSpec&) {
  const std::string rule = "C-AuthRev";
  for (std::size_t i = 0; i < cfg.committed.size(); ++i) {
    const auto& c = cfg.committed[i];
    if (c.secret != l.secret || c.owner != l.by) continue;
    if (!c.value) fail(rule, "secret " + l.secret + " committed as bottom");
    Configuration out = cfg;
    out.revealed.push_back({c.owner, c.secret, *c.value});
    out.committed.erase(out.committed.begin() + static_cast<std::ptrdiff_t>(i));
    return out;
  }
  fail(rule, "no commitment of " + l.by.value + " to " + l.secret);
}

Configuration step(const Configuration& cfg, const label::Rev& l, const ContractSpec&) {
  const std::string rule = "C-Rev";
  const auto values = revealed_values(cfg);
  for (const auto& s : l.branch->secrets)
    if (!values.count(s)) fail(rule, "secret " + s + " not revealed");
  auto f = fire_branch(cfg, l.x, l.branch, GuardedNode::Kind::Put, rule);
  if (!eval_pred(l.branch->pred, values)) fail(rule, "predicate is false");
  f.cfg.contracts.push_back({f.cfg.names.fresh("c"), l.branch->cont, f.consumed.value});
  return f.cfg;
}

Configuration step(const Configuration& cfg, const label::AuthBranch& l, const ContractSpec&) {
  const std::string rule = "C-AuthBranch";
  const auto i = contract_index(cfg, l.x, rule);
  if (!has_branch(cfg.contracts[i].contract, l.branch)) fail(rule, "branch not in contract");
  if (!l.branch->auths.count(l.by)) fail(rule, "branch does not need " + l.by.value);
  Configuration out = cfg;
  add_auth(out, {l.by, auth::Branch{l.x, l.branch}}, rule);
  return out;
}

const Deposit& own_deposit(const Configuration& cfg, const std::string& x,
                           const Participant& by, const std::string& rule) {
  const Deposit& d = cfg.deposits[deposit_index(cfg, x, rule)];
  if (d.owner != by) fail(rule, "deposit " + x + " not owned by " + by.value);
  return d;
}

Configuration step(const Configuration& cfg, const label::AuthJoin& l, const ContractSpec&) {
  const std::string rule = "Dep-AuthJoin";
  if (l.x == l.y) fail(rule, "cannot join a deposit with itself");
  const Rational v = own_deposit(cfg, l.x, l.by, rule).value + own_deposit(cfg, l.y, l.by, rule).value;
  Configuration out = cfg;
  add_auth(out, {l.by, auth::Join{l.x, l.y, l.by, v}}, rule);
  return out;
}

Configuration step(const Configuration& cfg, const label::Join& l, const ContractSpec&) {
  const std::string rule = "Dep-Join";
  const Deposit& dx = cfg.deposits[deposit_index(cfg, l.x, rule)];
  const Deposit& dy = cfg.deposits[deposit_index(cfg, l.y, rule)];
  if (l.x == l.y || dx.owner != dy.owner) fail(rule, "deposits have different owners");
  const Rational v = dx.value + dy.value;
  Authorization a1{dx.owner, auth::Join{l.x, l.y, dx.owner, v}};
  Authorization a2{dx.owner, auth::Join{l.y, l.x, dx.owner, v}};
  if (!cfg.has_auth(a1) || !cfg.has_auth(a2)) fail(rule, "missing join authorizations");
  const Participant owner = dx.owner;
  Configuration out = cfg;
  remove_auth(out, a1);
  remove_auth(out, a2);
  std::erase_if(out.deposits, [&](const Deposit& d) { return d.name == l.x || d.name == l.y; });
  out.deposits.push_back({out.names.fresh("d"), owner, v});
  return out;
}

Configuration step(const Configuration& cfg, const label::AuthDivide& l, const ContractSpec&) {
  const std::string rule = "Dep-AuthDivide";
  const Deposit& d = own_deposit(cfg, l.x, l.by, rule);
  if (l.v1 < 0 || l.v2 < 0 || l.v1 + l.v2 != d.value) fail(rule, "parts do not sum to the deposit");
  Configuration out = cfg;
  add_auth(out, {l.by, auth::Divide{l.x, l.by, l.v1, l.v2}}, rule);
  return out;
}

Configuration step(const Configuration& cfg, const label::Divide& l, const ContractSpec&) {
  const std::string rule = "Dep-Divide";
  const Deposit d = cfg.deposits[deposit_index(cfg, l.x, rule)];
  Authorization a{d.owner, auth::Divide{l.x, d.owner, l.v1, l.v2}};
  if (!cfg.has_auth(a)) fail(rule, "missing divide authorization");
  Configuration out = cfg;
  remove_auth(out, a);
  std::erase_if(out.deposits, [&](const Deposit& e) { return e.name == l.x; });
  out.deposits.push_back({out.names.fresh("d"), d.owner, l.v1});
  out.deposits.push_back({out.names.fresh("d"), d.owner, l.v2});
  return out;
}

Configuration step(const Configuration& cfg, const label::AuthDonate& l, const ContractSpec&) {
  const std::string rule = "Dep-AuthDonate";
  own_deposit(cfg, l.x, l.by, rule);
  Configuration out = cfg;
  add_auth(out, {l.by, auth::Donate{l.x, l.to}}, rule);
  return out;
}

Configuration step(const Configuration& cfg, const label::Donate& l, const ContractSpec&) {
  const std::string rule = "Dep-Donate";
  const Deposit d = cfg.deposits[deposit_index(cfg, l.x, rule)];
  Authorization a{d.owner, auth::Donate{l.x, l.to}};
  if (!cfg.has_auth(a)) fail(rule, "missing donate authorization");
  Configuration out = cfg;
  remove_auth(out, a);
  std::erase_if(out.deposits, [&](const Deposit& e) { return e.name == l.x; });
  out.deposits.push_back({out.names.fresh("d"), l.to, d.value});
  return out;
}

const auth::Destroy* find_destroy(const Configuration& cfg, const std::vector<std::string>& xs,
                                  std::size_t index) {
  for (const auto& a : cfg.auths)
    if (const auto* d = std::get_if<auth::Destroy>(&a.action))
      if (d->xs == xs && d->index == index) return d;
  return nullptr;
}

Configuration step(const Configuration& cfg, const label::AuthDestroy& l, const ContractSpec&) {
  const std::string rule = "Dep-AuthDestroy";
  if (l.index >= l.xs.size()) fail(rule, "index out of range");
  for (const auto& x : l.xs) deposit_index(cfg, x, rule);
  own_deposit(cfg, l.xs[l.index], l.by, rule);
  if (find_destroy(cfg, l.xs, l.index)) fail(rule, "authorization already granted");
  // y is shared by all destroy authorizations for the same deposits.
  Configuration out = cfg;
  std::string y;
  for (std::size_t i = 0; i < l.xs.size() && y.empty(); ++i)
    if (const auto* d = find_destroy(cfg, l.xs, i)) y = d->y;
  if (y.empty()) y = out.names.fresh("d");
  out.auths.push_back({l.by, auth::Destroy{l.xs, l.index, y}});
  return out;
}

Configuration step(const Configuration& cfg, const label::Destroy& l, const ContractSpec&) {
  const std::string rule = "Dep-Destroy";
  Configuration out = cfg;
  for (std::size_t i = 0; i < l.xs.size(); ++i) {
    const auto* d = find_destroy(cfg, l.xs, i);
    if (!d) fail(rule, "missing destroy authorization " + std::to_string(i + 1));
    const Deposit& dep = cfg.deposits[deposit_index(cfg, l.xs[i], rule)];
    remove_auth(out, {dep.owner, *d});
  }
  std::erase_if(out.deposits, [&](const Deposit& e) {
    return std::find(l.xs.begin(), l.xs.end(), e.name) != l.xs.end();
  });
  return out;
}

Configuration step(const Configuration& cfg, const label::Delay& l, const ContractSpec&) {
  if (l.delta <= 0) fail("C-Delay", "delay must be positive");
  Configuration out = cfg;
  out.time += l.delta;
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration helpers

void cartesian(const std::vector<std::vector<std::optional<Integer>>>& choices, std::size_t i,
               std::vector<std::optional<Integer>>& cur,
               const std::function<void(const std::vector<std::optional<Integer>>&)>& f) {
  if (i == choices.size()) {
    f(cur);
    return;
  }
  for (const auto& c : choices[i]) {
    cur.push_back(c);
    cartesian(choices, i + 1, cur, f);
    cur.pop_back();
  }
}

void bindings_choices(const std::vector<const PreAtom*>& vars, std::size_t i,
                      const Configuration& cfg, const std::set<std::string>& excluded,
                      std::vector<std::pair<std::string, std::string>>& cur,
                      const std::function<void()>& f) {
  if (i == vars.size()) {
    f();
    return;
  }
  for (const auto& d : cfg.deposits) {
    if (d.owner != vars[i]->owner || d.value != vars[i]->value || excluded.count(d.name)) continue;
    if (std::any_of(cur.begin(), cur.end(), [&](const auto& b) { return b.second == d.name; }))
      continue;
    cur.push_back({vars[i]->ref.name, d.name});
    bindings_choices(vars, i + 1, cfg, excluded, cur, f);
    cur.pop_back();
  }
}

}  // namespace

Revealed revealed_values(const Configuration& cfg) {
  Revealed r;
  for (const auto& s : cfg.revealed) r[s.secret] = s.value;
  return r;
}

Configuration apply_step(const Configuration& cfg, const Label& l, const ContractSpec& spec) {
  return std::visit([&](const auto& x) { return step(cfg, x, spec); }, l);
}

std::vector<Integer> delay_candidates(const Configuration& cfg) {
  std::set<Integer> deadlines;
  for (const auto& c : cfg.contracts) collect_deadlines(c.contract, deadlines);
  for (const auto& a : cfg.adverts) collect_deadlines(a.contract, deadlines);
  std::vector<Integer> out;
  if (deadlines.empty()) return out;
  auto next = deadlines.upper_bound(cfg.time);
  if (next != deadlines.end()) out.push_back(*next - cfg.time);
  const Integer past = *deadlines.rbegin() + 1;
  if (past > cfg.time && (out.empty() || past - cfg.time != out.back()))
    out.push_back(past - cfg.time);
  return out;
}

std::vector<Move> enumerate_moves(const Configuration& cfg, const ContractSpec& spec,
                                  const EnumOptions& opts) {
  std::vector<Move> moves;
  auto allowed = [&](const Label& l) {
    if (!opts.only) return true;
    const auto by = restricted_to(l);
    return !by || opts.only->count(*by) > 0;
  };
  auto offer = [&](Label l) {
    if (!allowed(l)) return;
    try {
      Configuration next = apply_step(cfg, l, spec);
      moves.push_back({std::move(l), std::move(next)});
    } catch (const RuleNotEnabled&) {
    }
  };

  if (opts.advertise) offer(label::Adv{spec.root});

  for (const auto& adv : cfg.adverts) {
    const auto parts = pre_participants(adv.pre);
    for (const auto& p : parts) {
      if (cfg.has_auth({p, auth::Commit{adv}})) continue;
      if (opts.only && !opts.only->count(p)) continue;
      std::vector<std::string> secrets;
      std::vector<std::vector<std::optional<Integer>>> choices;
      std::vector<const PreAtom*> vars;
      std::set<std::string> named;
      for (const auto& a : adv.pre) {
        if (a.kind == PreAtom::Kind::Secret && a.owner == p) {
          secrets.push_back(a.secret);
          std::vector<std::optional<Integer>> vs(opts.secret_values.begin(),
                                                 opts.secret_values.end());
          if (opts.allow_bottom && !spec.honest.count(p)) vs.push_back(std::nullopt);
          choices.push_back(std::move(vs));
        }
        if (a.kind == PreAtom::Kind::Deposit) {
          if (a.ref.is_var && a.owner == p) vars.push_back(&a);
          if (!a.ref.is_var) named.insert(a.ref.name);
        }
      }
      std::vector<std::pair<std::string, std::string>> cur;
      bindings_choices(vars, 0, cfg, named, cur, [&] {
        std::vector<std::optional<Integer>> vals;
        cartesian(choices, 0, vals, [&](const std::vector<std::optional<Integer>>& vs) {
          label::AuthCommit l{p, adv, {}, cur};
          for (std::size_t i = 0; i < secrets.size(); ++i) l.secrets.push_back({secrets[i], vs[i]});
          offer(l);
        });
      });
    }
    for (const auto& a : adv.pre) {
      if (a.kind != PreAtom::Kind::Deposit) continue;
      std::string name = a.ref.name;
      if (a.ref.is_var) {
        const Binding* b = find_binding(cfg, a.owner, a.ref.name);
        if (!b) continue;
        name = b->deposit;
      }
      offer(label::AuthInitDep{a.owner, adv, name});
    }
    if (adv.renegotiates) {
      for (const auto& p : parts) offer(label::AuthInitDep{p, adv, *adv.renegotiates});
      if (const auto* c = cfg.find_contract(*adv.renegotiates))
        for (const auto& g : c->contract.branches())
          if (g->kind == GuardedNode::Kind::Rngt) offer(label::Rngt{c->name, g, adv});
    } else {
      offer(label::Init{adv});
    }
  }

  for (const auto& c : cfg.contracts) {
    for (const auto& g : c.contract.branches()) {
      for (const auto& p : g->auths) offer(label::AuthBranch{p, c.name, g});
      switch (g->kind) {
        case GuardedNode::Kind::Withdraw:
          offer(label::Withdraw{g->to, c.value, c.name, g});
          break;
        case GuardedNode::Kind::Split:
          offer(label::Split{c.name, g});
          break;
        case GuardedNode::Kind::Put:
          offer(label::Rev{c.name, g});
          break;
        case GuardedNode::Kind::Rngt:
          if (opts.renegotiate) {
            NameSource scratch = cfg.names;
            try {
              Advertisement adv =
                  instantiate_equation(g->var, eval_args(g), spec.equations, scratch);
              adv.renegotiates = c.name;
              offer(label::AdvRngt{c.name, g, adv});
            } catch (const Error&) {
            }
          }
          break;
      }
    }
  }

  for (const auto& s : cfg.committed)
    if (s.value) offer(label::AuthRev{s.owner, s.secret});

  if (opts.deposit_moves) {
    std::set<Rational> amounts;
    for (const auto& a : spec.root.pre)
      if (a.kind == PreAtom::Kind::Deposit) amounts.insert(a.value);
    for (const auto& [_, eq] : spec.equations)
      for (const auto& a : eq.body.pre)
        if (a.kind == PreAtom::Kind::Deposit) amounts.insert(a.value);
    for (const auto& d : cfg.deposits) {
      for (const auto& e : cfg.deposits)
        if (d.name != e.name && d.owner == e.owner) offer(label::AuthJoin{d.owner, d.name, e.name});
      for (const auto& w : amounts)
        if (w > 0 && w < d.value) offer(label::AuthDivide{d.owner, d.name, w, d.value - w});
      for (const auto& p : spec.participants)
        if (p != d.owner) offer(label::AuthDonate{d.owner, d.name, p});
      if (opts.destroy) offer(label::AuthDestroy{d.owner, {d.name}, 0});
    }
    for (const auto& a : cfg.auths) {
      std::visit(overloaded{
                     [&](const auth::Join& j) {
                       if (j.x < j.y) offer(label::Join{j.x, j.y});
                     },
                     [&](const auth::Divide& d) { offer(label::Divide{d.x, d.v1, d.v2}); },
                     [&](const auth::Donate& d) { offer(label::Donate{d.x, d.to}); },
                     [&](const auth::Destroy& d) {
                       if (d.index == 0) offer(label::Destroy{d.xs});
                     },
                     [](const auto&) {},
                 },
                 a.action);
    }
  }

  if (opts.delays)
    for (const auto& d : delay_candidates(cfg)) offer(label::Delay{d});
  return moves;
}

}  // namespace bitml
