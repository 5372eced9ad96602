#pragma once

#include "bitml/abstraction.hpp"
#include "bitml/concrete.hpp"
#include "bitml/liquidity.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bitml {

// ---------------------------------------------------------------------------
// Over-approximation: every concrete run is matched by an abstract run.

struct RunMatch {
  std::size_t abstract_moves = 0;
  std::optional<std::string> failure;  // first step that could not be matched
};

/// Follows `run` with abstract moves on the descendants of `observed`. A
/// concrete step consuming a tracked contract is matched by exactly one
/// abstract move, every other step by none; after each step the abstract
/// configuration must equal the abstraction of the concrete descendants.
RunMatch match_run(const Run& run, const std::string& observed,
                   const std::set<Participant>& observers, const ContractSpec& spec);

struct CorrespondenceReport {
  std::size_t trials = 0;   // runs or paths checked
  std::size_t steps = 0;    // concrete steps taken
  std::size_t matched = 0;  // abstract moves matched or realized
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

/// `runs` random runs of at most `depth` steps from stipulated
/// configurations, cycling through uniform, progress and observer-only
/// policies and through secret values.
CorrespondenceReport check_over_approximation(const ContractSpec& spec,
                                              const std::set<Participant>& observers,
                                              std::size_t runs, std::size_t depth,
                                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Under-approximation: every L#-path is realized by observer-only steps.

/// Concrete sub-contracts of the root and of the equation bodies, indexed by
/// the key of their abstraction.
class Catalog {
 public:
  Catalog(const ContractSpec& spec, const std::set<Participant>& observers);

  /// A concrete contract whose abstraction has this key, if any.
  const Contract* find(const std::string& abs_key) const;
  std::size_t size() const { return by_key_.size(); }

 private:
  std::map<std::string, Contract> by_key_;
};

/// A configuration holding one contract of value 1 per abstract term, with
/// every secret of the spec committed (value 0). Concrete names are returned
/// in term order.
std::pair<Configuration, std::vector<std::string>> realize_state(const AbsConfig& state,
                                                                 const Catalog& catalog,
                                                                 const ContractSpec& spec);

/// Concrete steps performing one unstarred abstract move on contract x:
/// a delay past the branch deadlines, the observers' branch authorizations,
/// their reveals, then the move itself.
std::vector<Label> realize_move(const Configuration& cfg, const std::string& x,
                                const AbsGuarded& abs_branch,
                                const std::set<Participant>& observers,
                                const ContractSpec& spec);

/// Every L#-path of length <= max_len from every state of the space.
CorrespondenceReport check_under_approximation(const StateSpace& space, const ContractSpec& spec,
                                               const std::set<Participant>& observers,
                                               std::size_t max_len);

// ---------------------------------------------------------------------------
// Concrete spot-check of liquid verdicts.

struct SpotCheckOptions {
  std::size_t depth = 12;
  std::size_t max_states = 4000;        // adversarial exploration budget
  std::size_t liquidation_depth = 16;   // observer-only search
  std::size_t liquidation_states = 20000;
};

struct SpotCheckReport {
  std::size_t starts = 0;
  std::size_t explored = 0;
  bool truncated = false;  // the state budget cut the exploration short
  std::vector<std::string> counterexamples;

  bool ok() const { return counterexamples.empty(); }
};

/// Shortest observer-only run (labels in L-flat of the observers) after which
/// none of the contracts in `xs`, nor anything descending from them, is left.
std::optional<std::vector<Label>> concrete_liquidation(const Configuration& cfg,
                                                       const std::set<std::string>& xs,
                                                       const std::set<Participant>& observers,
                                                       const ContractSpec& spec,
                                                       const SpotCheckOptions& opts = {});

/// Explores the concrete LTS from the stipulations of spec.root (observers
/// honest, everyone else free to withhold secrets, commit bottom and deny
/// authorizations) and checks that in every explored configuration the
/// observers alone can liquidate the root's descendants.
SpotCheckReport spot_check(const ContractSpec& spec, const std::set<Participant>& observers,
                           const SpotCheckOptions& opts = {});

}  // namespace bitml
