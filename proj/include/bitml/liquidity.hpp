#pragma once

#include "bitml/abstraction.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace bitml {

class StateCapExceeded : public Error {
 public:
  explicit StateCapExceeded(std::size_t cap)
      : Error("state cap of " + std::to_string(cap) + " states exceeded"), cap_(cap) {}
  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
};

/// 10^6, or BITML_STATE_CAP when set to a positive integer.
std::size_t default_state_cap();

struct StateEdge {
  AbsLabel label;           // target is the abstract name in the source state
  std::size_t target_slot;  // canonical position of the target in the source state
  std::string branch;       // key of the fired branch
  std::size_t to;
};

struct StateSpace {
  std::vector<AbsConfig> states;  // one representative per canonical state
  std::vector<CanonicalState> canon;
  std::unordered_map<std::string, std::size_t> index;  // canonical text -> id
  std::vector<std::vector<StateEdge>> edges;
  std::vector<std::size_t> parent;       // BFS tree; parent[initial] == initial
  std::vector<std::size_t> parent_edge;  // index into edges[parent[s]]
  std::size_t initial = 0;
  AbsEquations equations;

  std::size_t edge_count() const;
  /// Edge path from the initial state to s along the BFS tree.
  std::vector<std::pair<std::size_t, StateEdge>> path_to(std::size_t s) const;
};

/// Origin tag of the observed root contract in the initial abstract state.
inline const std::string kRootOrigin = "main";

struct LiquidityProblem {
  ContractSpec spec;
  std::set<Participant> observers;
};

/// The abstraction of the freshly stipulated root contract.
AbsConfig initial_abstract_state(const ContractSpec& spec, const std::set<Participant>& observers);

StateSpace build_state_space(const AbsConfig& initial, const AbsEquations& eqs,
                             std::size_t cap = default_state_cap());
StateSpace build_state_space(const LiquidityProblem& problem,
                             std::size_t cap = default_state_cap());

struct Liquidation {
  bool ok = false;
  std::vector<AbsLabel> witness;  // names refer to the successive configurations
  std::vector<std::string> branches;
};

/// Memo for liquidable, keyed by the canonical text of the origin's terms.
using LiquidableCache = std::unordered_map<std::string, std::optional<std::size_t>>;

/// Shortest L#-path eliminating every term of `origin`. Only moves on terms of
/// that origin are explored; an absent origin is trivially liquidable.
Liquidation liquidable(const AbsConfig& state, const std::string& origin,
                       const AbsEquations& eqs);
/// Witness-free variant returning the length of the shortest liquidation.
std::optional<std::size_t> liquidable_length(const AbsConfig& state, const std::string& origin,
                                             const AbsEquations& eqs, LiquidableCache& cache);
bool liquidable(const StateSpace& space, std::size_t s, const std::string& origin);

/// Structural oracle: can the observers alone drive this term to nothing?
bool solvable(const AbsContract& term);
bool solvable(const AbsGuarded& branch);

struct WitnessStep {
  std::size_t state;
  std::string label;  // "[slot] branch", starred labels prefixed with '*'
};

struct OriginVerdict {
  enum class Status { Liquid, NotVerified, EmptyStuck };
  std::string origin;
  Status status = Status::Liquid;
  std::optional<std::vector<WitnessStep>> witness;  // path to the offending state
  std::optional<std::string> stuck_term;  // innermost unsolvable part of the stuck term
  std::optional<std::size_t> stuck_state;
};

std::string status_string(OriginVerdict::Status s);

struct Verdict {
  std::string contract;
  std::vector<std::string> observers;
  bool liquid = true;
  std::size_t states = 0;
  std::size_t edges = 0;
  std::size_t max_liquidation = 0;
  std::vector<OriginVerdict> details;
};

Verdict check_liquidity(const StateSpace& space, const std::set<std::string>& origins,
                        const std::string& contract, const std::set<Participant>& observers);
Verdict check_liquidity(const LiquidityProblem& problem, const std::string& contract = "main",
                        std::size_t cap = default_state_cap());

nlohmann::json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);
std::string explain(const Verdict& v);

/// {states: [{id, canonical, tokens}], edges: [{from, label: {target_slot, starred}, to}]}
nlohmann::json states_to_json(const StateSpace& space);

}  // namespace bitml
