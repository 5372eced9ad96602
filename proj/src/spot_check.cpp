#include "bitml/correspondence.hpp"

#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace bitml {

namespace {

std::set<std::string> next_tracked(const std::set<std::string>& tracked, const Configuration& before,
                                   const Configuration& after) {
  const auto old = before.contract_names(), now = after.contract_names();
  bool inherits = false;
  std::set<std::string> out;
  for (const auto& x : tracked) {
    if (now.count(x))
      out.insert(x);
    else
      inherits = true;
  }
  if (inherits)
    for (const auto& x : now)
      if (!old.count(x)) out.insert(x);
  return out;
}

std::string search_key(const Configuration& cfg, const std::set<std::string>& tracked) {
  std::string k = canonical_key(cfg) + " | tracked:";
  std::multiset<std::string> ks;
  for (const auto& x : tracked)
    if (const auto* c = cfg.find_contract(x)) ks.insert(c->contract.key() + "@" + to_string(c->value));
  for (const auto& s : ks) k += " " + s;
  return k;
}

}  // namespace

std::optional<std::vector<Label>> concrete_liquidation(const Configuration& cfg,
                                                       const std::set<std::string>& xs,
                                                       const std::set<Participant>& observers,
                                                       const ContractSpec& spec,
                                                       const SpotCheckOptions& opts) {
  struct Node {
    Configuration cfg;
    std::set<std::string> tracked;
    std::size_t parent;
    std::optional<Label> label;
    std::size_t depth;
  };
  EnumOptions eo;
  eo.only = observers;
  eo.allow_bottom = false;
  eo.deposit_moves = false;
  eo.advertise = false;
  eo.renegotiate = false;

  std::vector<Node> nodes;
  std::unordered_set<std::string> seen;
  std::set<std::string> start;
  for (const auto& x : xs)
    if (cfg.find_contract(x)) start.insert(x);
  nodes.push_back({cfg, start, 0, std::nullopt, 0});
  seen.insert(search_key(cfg, start));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].tracked.empty()) {
      std::vector<Label> path;
      for (std::size_t j = i; j != 0; j = nodes[j].parent) path.push_back(*nodes[j].label);
      return std::vector<Label>(path.rbegin(), path.rend());
    }
    if (nodes[i].depth >= opts.liquidation_depth) continue;
    const Configuration cur = nodes[i].cfg;
    const std::set<std::string> tracked = nodes[i].tracked;
    const std::size_t depth = nodes[i].depth;
    for (auto& m : enumerate_moves(cur, spec, eo)) {
      if (!in_label_set(m.label, observers)) continue;
      auto t = next_tracked(tracked, cur, m.next);
      if (!seen.insert(search_key(m.next, t)).second) continue;
      if (nodes.size() >= opts.liquidation_states) return std::nullopt;
      nodes.push_back({std::move(m.next), std::move(t), i, std::move(m.label), depth + 1});
    }
  }
  return std::nullopt;
}

SpotCheckReport spot_check(const ContractSpec& spec_in, const std::set<Participant>& observers,
                           const SpotCheckOptions& opts) {
  ContractSpec spec = spec_in;
  spec.honest = observers;
  const auto owners = spec.secret_owners();

  // Observers commit to 0 or 1; everyone else may also commit bottom.
  std::vector<std::map<std::string, std::optional<Integer>>> assignments{{}};
  for (const auto& a : spec.root.pre) {
    if (a.kind != PreAtom::Kind::Secret) continue;
    std::vector<std::optional<Integer>> vals{Integer(0), Integer(1)};
    if (!observers.count(a.owner)) vals.push_back(std::nullopt);
    std::vector<std::map<std::string, std::optional<Integer>>> next;
    for (const auto& base : assignments)
      for (const auto& v : vals) {
        auto m = base;
        m[a.secret] = v;
        next.push_back(std::move(m));
      }
    assignments = std::move(next);
  }

  SpotCheckReport rep;
  EnumOptions eo;
  eo.deposit_moves = false;
  eo.advertise = false;
  eo.allow_bottom = true;

  std::deque<std::pair<Configuration, std::size_t>> queue;
  std::unordered_set<std::string> seen;
  for (const auto& values : assignments) {
    const Stipulation st = stipulate_root(spec, values);
    if (seen.insert(canonical_key(st.run.last())).second) queue.push_back({st.run.last(), 0});
    ++rep.starts;
  }
  while (!queue.empty()) {
    auto [cfg, depth] = std::move(queue.front());
    queue.pop_front();
    ++rep.explored;
    // Every contract here descends from the root: fresh advertisements are
    // disabled, so only renegotiations create contracts.
    if (!concrete_liquidation(cfg, cfg.contract_names(), observers, spec, opts))
      rep.counterexamples.push_back("depth " + std::to_string(depth) + ":\n" + describe(cfg));
    if (depth >= opts.depth) continue;
    for (auto& m : enumerate_moves(cfg, spec, eo)) {
      if (!seen.insert(canonical_key(m.next)).second) continue;
      if (seen.size() > opts.max_states) {
        rep.truncated = true;
        continue;
      }
      queue.push_back({std::move(m.next), depth + 1});
    }
  }
  return rep;
}

}  // namespace bitml
