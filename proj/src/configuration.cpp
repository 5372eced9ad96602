#include "bitml/concrete.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace bitml {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

bool is_generated(const std::string& token) {
  const auto colon = token.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) return false;
  for (std::size_t i = colon + 1; i < token.size(); ++i)
    if (token[i] < '0' || token[i] > '9') return false;
  return true;
}

bool is_delim(char c) { return c == ' ' || c == '(' || c == ')' || c == ',' || c == '|' || c == '{' || c == '}' || c == '[' || c == ']' || c == '='; }

// Calls f on every maximal non-delimiter token, building the rewritten string.
template <class F>
std::string map_tokens(const std::string& s, F&& f) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_delim(s[i])) {
      out += s[i++];
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && !is_delim(s[j])) ++j;
    out += f(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> term_strings(const Configuration& cfg) {
  std::vector<std::string> terms;
  for (const auto& d : cfg.deposits)
    terms.push_back("dep[" + d.name + "]{" + d.owner.value + "," + to_string(d.value) + "}");
  for (const auto& c : cfg.contracts)
    terms.push_back("ctr[" + c.name + "]{" + c.contract.key() + "," + to_string(c.value) + "}");
  for (const auto& a : cfg.adverts) terms.push_back("adv{" + key_of(a) + "}");
  for (const auto& s : cfg.committed)
    terms.push_back("com{" + s.owner.value + "," + s.secret + "," +
                    (s.value ? to_string(*s.value) : std::string("bot")) + "}");
  for (const auto& s : cfg.revealed)
    terms.push_back("rev{" + s.owner.value + "," + s.secret + "," + to_string(s.value) + "}");
  for (const auto& a : cfg.auths) terms.push_back("auth{" + auth_key(a) + "}");
  for (const auto& b : cfg.bindings)
    terms.push_back("bind{" + b.owner.value + "," + b.var + "," + b.deposit + "}");
  return terms;
}

}  // namespace

std::string auth_key(const Authorization& a) {
  const std::string by = a.by.value + ":";
  return std::visit(
      overloaded{
          [&](const auth::Commit& c) { return by + "commit{" + key_of(c.adv) + "}"; },
          [&](const auth::Spend& s) {
            return by + "spend{" + s.name + "," + key_of(s.adv) + "}";
          },
          [&](const auth::Branch& b) {
            return by + "branch{" + b.contract + "," + b.branch->key + "}";
          },
          [&](const auth::Join& j) {
            return by + "join{" + j.x + "," + j.y + "," + j.owner.value + "," +
                   to_string(j.value) + "}";
          },
          [&](const auth::Divide& d) {
            return by + "divide{" + d.x + "," + d.owner.value + "," + to_string(d.v1) + "," +
                   to_string(d.v2) + "}";
          },
          [&](const auth::Donate& d) { return by + "donate{" + d.x + "," + d.to.value + "}"; },
          [&](const auth::Destroy& d) {
            return by + "destroy{" + join(d.xs, " ") + "," + std::to_string(d.index + 1) + "," +
                   d.y + "}";
          },
      },
      a.action);
}

const ActiveContract* Configuration::find_contract(const std::string& name) const {
  for (const auto& c : contracts)
    if (c.name == name) return &c;
  return nullptr;
}

const Deposit* Configuration::find_deposit(const std::string& name) const {
  for (const auto& d : deposits)
    if (d.name == name) return &d;
  return nullptr;
}

bool Configuration::has_auth(const Authorization& a) const {
  const auto k = auth_key(a);
  return std::any_of(auths.begin(), auths.end(),
                     [&](const Authorization& b) { return auth_key(b) == k; });
}

std::set<std::string> Configuration::contract_names() const {
  std::set<std::string> out;
  for (const auto& c : contracts) out.insert(c.name);
  return out;
}

Rational Configuration::total_value() const {
  Rational v = 0;
  for (const auto& d : deposits) v += d.value;
  for (const auto& c : contracts) v += c.value;
  return v;
}

std::vector<std::string> check_configuration(const Configuration& cfg) {
  std::vector<std::string> errs;
  std::set<std::string> names;
  for (const auto& d : cfg.deposits) {
    if (!names.insert(d.name).second) errs.push_back("duplicate name " + d.name);
    if (d.value < 0) errs.push_back("negative deposit " + d.name);
  }
  for (const auto& c : cfg.contracts) {
    if (!names.insert(c.name).second) errs.push_back("duplicate name " + c.name);
    if (c.value < 0) errs.push_back("negative contract value " + c.name);
  }
  std::set<std::string> keys;
  for (const auto& a : cfg.auths)
    if (!keys.insert(auth_key(a)).second) errs.push_back("duplicate authorization " + auth_key(a));
  std::set<std::string> secrets;
  for (const auto& s : cfg.committed)
    if (!secrets.insert(s.secret).second) errs.push_back("secret committed twice " + s.secret);
  for (const auto& s : cfg.revealed)
    if (!secrets.insert(s.secret).second) errs.push_back("secret committed twice " + s.secret);
  if (cfg.time < 0) errs.push_back("negative time");
  return errs;
}

Configuration initial_configuration(const ContractSpec& spec, std::size_t wallet_copies) {
  Configuration cfg;
  // Named deposits keep their spec name so that C-Adv finds them.
  for (const auto& atom : spec.root.pre) {
    if (atom.kind != PreAtom::Kind::Deposit) continue;
    if (!atom.ref.is_var) cfg.deposits.push_back({atom.ref.name, atom.owner, atom.value});
  }
  for (const auto& atom : spec.root.pre) {
    if (atom.kind != PreAtom::Kind::Deposit || !atom.ref.is_var) continue;
    cfg.deposits.push_back({cfg.names.fresh("d"), atom.owner, atom.value});
  }
  // Wallet deposits for renegotiation, one pool per distinct (owner, value).
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& name : spec.equation_order) {
    for (const auto& atom : spec.equations.at(name).body.pre) {
      if (atom.kind != PreAtom::Kind::Deposit) continue;
      if (!seen.insert({atom.owner.value, to_string(atom.value)}).second) continue;
      for (std::size_t i = 0; i < wallet_copies; ++i)
        cfg.deposits.push_back({cfg.names.fresh("d"), atom.owner, atom.value});
    }
  }
  return cfg;
}

std::string canonical_key(const Configuration& cfg) {
  auto terms = term_strings(cfg);
  auto masked = [](const std::string& s) {
    return map_tokens(s, [](const std::string& t) { return is_generated(t) ? "_" : t; });
  };
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& t : terms) order.push_back({masked(t), t});
  std::sort(order.begin(), order.end());
  std::map<std::string, std::string> ren;
  std::vector<std::string> out;
  for (const auto& [m, t] : order) {
    out.push_back(map_tokens(t, [&](const std::string& tok) {
      if (!is_generated(tok)) return tok;
      auto it = ren.find(tok);
      if (it == ren.end()) it = ren.emplace(tok, "#" + std::to_string(ren.size())).first;
      return it->second;
    }));
  }
  std::sort(out.begin(), out.end());
  return join(out, " | ") + " | t=" + to_string(cfg.time);
}

std::uint64_t config_digest(const Configuration& cfg) { return fnv1a(canonical_key(cfg)); }

std::string describe(const Configuration& cfg) {
  std::ostringstream os;
  os << "time " << to_string(cfg.time) << "\n";
  for (const auto& c : cfg.contracts)
    os << "  contract " << c.name << " [" << to_string(c.value) << "] " << c.contract.key()
       << "\n";
  for (const auto& d : cfg.deposits)
    os << "  deposit " << d.name << " " << d.owner.value << " " << to_string(d.value) << "\n";
  for (const auto& a : cfg.adverts) os << "  advert " << key_of(a) << "\n";
  for (const auto& s : cfg.committed)
    os << "  committed " << s.owner.value << " " << s.secret << " "
       << (s.value ? to_string(*s.value) : std::string("bot")) << "\n";
  for (const auto& s : cfg.revealed)
    os << "  revealed " << s.owner.value << " " << s.secret << " " << to_string(s.value)
       << "\n";
  for (const auto& a : cfg.auths) os << "  auth " << auth_key(a) << "\n";
  for (const auto& b : cfg.bindings)
    os << "  binding " << b.owner.value << " " << b.var << " -> " << b.deposit << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Labels

std::string to_string(const Label& l) {
  return std::visit(
      overloaded{
          [](const label::Adv& a) { return "adv(" + key_of(a.adv) + ")"; },
          [](const label::AdvRngt& a) {
            return "advrngt(" + a.x + ", " + a.branch->key + ", " + key_of(a.adv) + ")";
          },
          [](const label::AuthCommit& a) {
            std::vector<std::string> s, b;
            for (const auto& [name, v] : a.secrets)
              s.push_back(name + "=" + (v ? to_string(*v) : std::string("bot")));
            for (const auto& [var, dep] : a.bindings) b.push_back(var + "->" + dep);
            return a.by.value + ":commit(" + key_of(a.adv) + "; " + join(s, " ") + "; " +
                   join(b, " ") + ")";
          },
          [](const label::AuthInitDep& a) {
            return a.by.value + ":spend(" + key_of(a.adv) + ", " + a.spent + ")";
          },
          [](const label::Init& a) { return "init(" + key_of(a.adv) + ")"; },
          [](const label::Rngt& a) {
            return "rngt(" + a.x + ", " + a.branch->key + ", " + key_of(a.adv) + ")";
          },
          [](const label::Withdraw& a) {
            return "withdraw(" + a.to.value + ", " + to_string(a.value) + ", " + a.x + ", " +
                   a.branch->key + ")";
          },
          [](const label::Split& a) { return "split(" + a.x + ", " + a.branch->key + ")"; },
          [](const label::AuthRev& a) { return a.by.value + ":reveal(" + a.secret + ")"; },
          [](const label::Rev& a) { return "rev(" + a.x + ", " + a.branch->key + ")"; },
          [](const label::AuthBranch& a) {
            return a.by.value + ":branch(" + a.x + ", " + a.branch->key + ")";
          },
          [](const label::AuthJoin& a) {
            return a.by.value + ":join(" + a.x + ", " + a.y + ")";
          },
          [](const label::Join& a) { return "join(" + a.x + ", " + a.y + ")"; },
          [](const label::AuthDivide& a) {
            return a.by.value + ":divide(" + a.x + ", " + to_string(a.v1) + ", " +
                   to_string(a.v2) + ")";
          },
          [](const label::Divide& a) {
            return "divide(" + a.x + ", " + to_string(a.v1) + ", " + to_string(a.v2) + ")";
          },
          [](const label::AuthDonate& a) {
            return a.by.value + ":donate(" + a.x + ", " + a.to.value + ")";
          },
          [](const label::Donate& a) { return "donate(" + a.x + ", " + a.to.value + ")"; },
          [](const label::AuthDestroy& a) {
            return a.by.value + ":destroy(" + join(a.xs, " ") + ", " +
                   std::to_string(a.index + 1) + ")";
          },
          [](const label::Destroy& a) { return "destroy(" + join(a.xs, " ") + ")"; },
          [](const label::Delay& a) { return "delay(" + to_string(a.delta) + ")"; },
      },
      l);
}

std::string rule_name(const Label& l) {
  static const char* names[] = {
      "C-Adv",     "C-AdvRngt",  "C-AuthCommit",   "C-AuthInitDep", "C-Init",
      "C-Rngt",    "C-Withdraw", "C-Split",        "C-AuthRev",     "C-Rev",
      "C-AuthBranch", "Dep-AuthJoin", "Dep-Join",  "Dep-AuthDivide", "Dep-Divide",
      "Dep-AuthDonate", "Dep-Donate", "Dep-AuthDestroy", "Dep-Destroy", "C-Delay"};
  return names[l.index()];
}

std::optional<Participant> restricted_to(const Label& l) {
  return std::visit(
      [](const auto& x) -> std::optional<Participant> {
        if constexpr (requires { x.by; })
          return x.by;
        else
          return std::nullopt;
      },
      l);
}

bool is_participant_restricted(const Label& l) { return restricted_to(l).has_value(); }

std::optional<std::string> consumed_contract(const Label& l) {
  return std::visit(
      [](const auto& x) -> std::optional<std::string> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, label::Rngt> || std::is_same_v<T, label::Withdraw> ||
                      std::is_same_v<T, label::Split> || std::is_same_v<T, label::Rev>)
          return x.x;
        else
          return std::nullopt;
      },
      l);
}

bool in_label_set(const Label& l, const std::set<Participant>& observers) {
  const auto by = restricted_to(l);
  return !by || observers.count(*by) > 0;
}

}  // namespace bitml
