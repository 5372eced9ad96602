#include "bitml/concrete.hpp"

#include <json.hpp>

#include <istream>
#include <map>
#include <ostream>
#include <random>

namespace bitml {

using nlohmann::json;

void Run::push(const Label& l, const ContractSpec& spec) {
  Configuration next = apply_step(last(), l, spec);
  steps.push_back({l, std::move(next)});
}

namespace {

using OriginMap = std::map<std::string, std::optional<std::string>>;

OriginMap origin_map(const Run& run) {
  OriginMap m;
  for (const auto& x : run.initial.contract_names()) m[x] = x;
  const Configuration* prev = &run.initial;
  for (const auto& s : run.steps) {
    const auto before = prev->contract_names();
    const auto after = s.config.contract_names();
    std::vector<std::string> consumed, introduced;
    for (const auto& x : before)
      if (!after.count(x)) consumed.push_back(x);
    for (const auto& x : after)
      if (!before.count(x)) introduced.push_back(x);
    std::optional<std::string> inherited;
    if (consumed.size() == 1) {
      auto it = m.find(consumed.front());
      if (it != m.end()) inherited = it->second;
    }
    for (const auto& x : introduced) m[x] = inherited;
    prev = &s.config;
  }
  return m;
}

}  // namespace

std::optional<std::string> origin(const Run& run, const std::string& x) {
  const auto m = origin_map(run);
  auto it = m.find(x);
  return it == m.end() ? std::nullopt : it->second;
}

std::set<std::string> descendants(const Run& run, const std::set<std::string>& xs) {
  const auto m = origin_map(run);
  std::set<std::string> out;
  for (const auto& x : run.last().contract_names()) {
    auto it = m.find(x);
    if (it != m.end() && it->second && xs.count(*it->second)) out.insert(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random runs

Policy Policy::parse(const std::string& text) {
  Policy p;
  if (text == "uniform") return p;
  if (text == "progress") {
    p.kind = Kind::Progress;
    return p;
  }
  if (text.rfind("only:", 0) == 0) {
    p.kind = Kind::Only;
    std::string rest = text.substr(5);
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto comma = rest.find(',', start);
      if (comma == std::string::npos) comma = rest.size();
      if (comma > start) p.only.insert(Participant{rest.substr(start, comma - start)});
      start = comma + 1;
    }
    if (p.only.empty()) throw Error("policy only: needs at least one participant");
    return p;
  }
  throw Error("unknown policy " + text + " (expected uniform, progress or only:A[,B])");
}

std::string Policy::name() const {
  switch (kind) {
    case Kind::Uniform:
      return "uniform";
    case Kind::Progress:
      return "progress";
    case Kind::Only: {
      std::string s = "only:";
      bool first = true;
      for (const auto& p : only) {
        if (!first) s += ",";
        s += p.value;
        first = false;
      }
      return s;
    }
  }
  return "uniform";
}

namespace {

double progress_weight(const Label& l) {
  switch (l.index()) {
    case 4:  // Init
    case 5:  // Rngt
    case 6:  // Withdraw
    case 7:  // Split
    case 9:  // Rev
      return 8.0;
    case 19:  // Delay
      return 1.0;
    case 11: case 12: case 13: case 14: case 15: case 16: case 17: case 18:
      return 0.25;
    default:
      return 3.0;
  }
}

}  // namespace

Run random_run(const Configuration& start, const ContractSpec& spec, std::size_t depth,
               std::uint64_t seed, const Policy& policy) {
  Run run{start, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t i = 0; i < depth; ++i) {
    EnumOptions opts;
    opts.deposit_moves = policy.deposit_moves;
    opts.allow_bottom = coin(rng) < policy.bottom_probability;
    if (policy.kind == Policy::Kind::Only) opts.only = policy.only;
    auto moves = enumerate_moves(run.last(), spec, opts);
    if (moves.empty()) break;
    std::vector<double> w;
    for (const auto& m : moves)
      w.push_back(policy.kind == Policy::Kind::Progress ? progress_weight(m.label) : 1.0);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    auto& m = moves[pick(rng)];
    run.steps.push_back({std::move(m.label), std::move(m.next)});
  }
  return run;
}

Stipulation stipulate_root(const ContractSpec& spec,
                           const std::map<std::string, std::optional<Integer>>& values,
                           std::size_t wallet_copies) {
  Stipulation s{{initial_configuration(spec, wallet_copies), {}}, {}};
  Run& run = s.run;
  run.push(label::Adv{spec.root}, spec);
  const Advertisement& adv = spec.root;

  std::set<std::string> named, used;
  for (const auto& a : adv.pre)
    if (a.kind == PreAtom::Kind::Deposit && !a.ref.is_var) named.insert(a.ref.name);

  for (const auto& p : pre_participants(adv.pre)) {
    label::AuthCommit l{p, adv, {}, {}};
    for (const auto& a : adv.pre) {
      if (a.owner != p) continue;
      if (a.kind == PreAtom::Kind::Secret) {
        auto it = values.find(a.secret);
        l.secrets.push_back({a.secret, it == values.end() ? std::optional<Integer>(0) : it->second});
      } else if (a.ref.is_var) {
        for (const auto& d : run.last().deposits) {
          if (d.owner != p || d.value != a.value || named.count(d.name) || used.count(d.name))
            continue;
          used.insert(d.name);
          l.bindings.push_back({a.ref.name, d.name});
          break;
        }
      }
    }
    run.push(l, spec);
  }
  for (const auto& a : adv.pre) {
    if (a.kind != PreAtom::Kind::Deposit) continue;
    std::string name = a.ref.name;
    if (a.ref.is_var)
      for (const auto& b : run.last().bindings)
        if (b.owner == a.owner && b.var == a.ref.name) name = b.deposit;
    run.push(label::AuthInitDep{a.owner, adv, name}, spec);
  }
  const auto before = run.last().contract_names();
  run.push(label::Init{adv}, spec);
  for (const auto& x : run.last().contract_names())
    if (!before.count(x)) s.contract = x;
  return s;
}

// ---------------------------------------------------------------------------
// Traces

namespace {

json time_json(const Integer& t) {
  if (t < Integer(1) << 62) return json(static_cast<long long>(t));
  return json(to_string(t));
}

json trace_line(const std::optional<Label>& l, const Configuration& cfg) {
  json j;
  j["label"] = l ? json(to_string(*l)) : json(nullptr);
  j["config_digest"] = hex_digest(config_digest(cfg));
  j["time"] = time_json(cfg.time);
  return j;
}

}  // namespace

void write_trace(const Run& run, std::ostream& out) {
  out << trace_line(std::nullopt, run.initial).dump() << "\n";
  for (const auto& s : run.steps) out << trace_line(s.label, s.config).dump() << "\n";
}

std::string replay_trace(const Configuration& start, const ContractSpec& spec, std::istream& in,
                         const EnumOptions& opts) {
  Configuration cur = start;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++n;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      return "line " + std::to_string(n) + ": " + e.what();
    }
    if (!j.contains("label") || !j.contains("config_digest"))
      return "line " + std::to_string(n) + ": missing fields";
    if (n == 1) {
      if (!j["label"].is_null()) return "line 1: expected a null label";
    } else {
      const auto want = j["label"].get<std::string>();
      bool found = false;
      EnumOptions o = opts;
      o.allow_bottom = true;
      for (auto& m : enumerate_moves(cur, spec, o)) {
        if (to_string(m.label) != want) continue;
        cur = std::move(m.next);
        found = true;
        break;
      }
      if (!found) return "line " + std::to_string(n) + ": move not enabled: " + want;
    }
    if (j["config_digest"].get<std::string>() != hex_digest(config_digest(cur)))
      return "line " + std::to_string(n) + ": digest mismatch";
  }
  if (n == 0) return "empty trace";
  return "";
}

}  // namespace bitml
