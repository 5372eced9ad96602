#pragma once

#include "bitml/ast.hpp"
#include "bitml/concrete.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace bitml {

struct AbsGuardedNode;
using AbsGuarded = std::shared_ptr<const AbsGuardedNode>;

/// Multiset of abstract branches, sorted by key.
class AbsContract {
 public:
  AbsContract();
  explicit AbsContract(std::vector<AbsGuarded> branches);

  const std::vector<AbsGuarded>& branches() const { return node_->branches; }
  const std::string& key() const { return node_->key; }
  bool empty() const { return node_->branches.empty(); }

  friend bool operator==(const AbsContract& a, const AbsContract& b) {
    return a.key() == b.key();
  }

 private:
  struct Node {
    std::vector<AbsGuarded> branches;
    std::string key;
  };
  std::shared_ptr<const Node> node_;
};

struct AbsGuardedNode {
  enum class Kind { Withdraw, Tau, Split, Rngt };
  Kind kind;
  bool starred = false;
  Participant to;                  // Withdraw
  AbsContract cont;                // Tau
  std::vector<AbsContract> parts;  // Split, in source order
  std::string var;                 // Rngt
  std::string key;                 // parts enter the key sorted
};

AbsGuarded abs_withdraw(const Participant& to);
AbsGuarded abs_tau(AbsContract cont);
AbsGuarded abs_split(std::vector<AbsContract> parts);
AbsGuarded abs_rngt(const std::string& var);
/// Idempotent: starring a starred branch returns it unchanged.
AbsGuarded star(const AbsGuarded& g);

/// Secrets owned by any observer.
std::set<std::string> observer_secrets(const ContractSpec& spec,
                                       const std::set<Participant>& observers);

AbsGuarded abstract_guarded(const Guarded& g, const std::set<Participant>& observers,
                            const ContractSpec& spec);
AbsContract abstract_contract(const Contract& c, const std::set<Participant>& observers,
                              const ContractSpec& spec);

/// X maps to the abstraction of its body; arguments play no role.
using AbsEquations = std::map<std::string, AbsContract>;
AbsEquations abstract_equations(const ContractSpec& spec, const std::set<Participant>& observers);

struct AbsTerm {
  std::string name;
  std::string origin;
  AbsContract term;
};

struct AbsConfig {
  std::vector<AbsTerm> terms;
  std::multiset<std::string> tokens;
  std::uint64_t next_name = 0;

  std::string fresh() { return "t:" + std::to_string(next_name++); }
  const AbsTerm* find(const std::string& name) const;
};

/// Keeps the contracts named in xs, each tagged with its own name as origin.
AbsConfig abstract_config(const Configuration& cfg, const std::set<Participant>& observers,
                          const std::set<std::string>& xs, const ContractSpec& spec);

struct AbsLabel {
  std::string target;
  bool starred = false;
};

struct AbsMove {
  AbsLabel label;
  AbsGuarded branch;
  AbsConfig next;
  std::vector<std::string> introduced;  // fresh names, in creation order
};

/// Fires `branch` (which must be a branch of the named term, up to key) and
/// returns the move. Fresh names come from cfg.next_name unless `names` gives
/// them explicitly.
AbsMove abs_fire(const AbsConfig& cfg, const std::string& name, const AbsGuarded& branch,
                 const AbsEquations& eqs, const std::vector<std::string>* names = nullptr);

std::vector<AbsMove> abs_enabled(const AbsConfig& cfg, const AbsEquations& eqs);

/// abs_enabled without the moves that duplicate a recursion token.
std::vector<AbsMove> fin_enabled(const AbsConfig& cfg, const AbsEquations& eqs);

struct CanonicalState {
  std::vector<std::pair<std::string, std::string>> terms;  // (origin, key), sorted
  std::vector<std::string> tokens;                         // sorted
  std::string text;
  std::uint64_t digest = 0;

  friend bool operator==(const CanonicalState& a, const CanonicalState& b) {
    return a.text == b.text;
  }
};

CanonicalState canonicalize(const AbsConfig& cfg);

/// Position of the named term in the canonical order of cfg.
std::size_t canonical_slot(const AbsConfig& cfg, const std::string& name);

/// Nested AbsContract keys count as one node each.
std::size_t abs_depth(const AbsContract& c);

}  // namespace bitml
