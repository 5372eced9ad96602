#pragma once

#include "bitml/ast.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bitml {

// ---------------------------------------------------------------------------
// Configuration terms

struct ActiveContract {
  std::string name;
  Contract contract;
  Rational value;
};

struct Deposit {
  std::string name;
  Participant owner;
  Rational value;
};

struct CommittedSecret {
  Participant owner;
  std::string secret;
  std::optional<Integer> value;  // nullopt is the ill-formed commitment
};

struct RevealedSecret {
  Participant owner;
  std::string secret;
  Integer value;
};

struct Binding {
  Participant owner;
  std::string var;
  std::string deposit;
};

namespace auth {
struct Commit {
  Advertisement adv;
};
/// Spend deposit (or, for renegotiation, contract) `name` for adv.
struct Spend {
  std::string name;
  Advertisement adv;
};
struct Branch {
  std::string contract;
  Guarded branch;
};
struct Join {
  std::string x, y;
  Participant owner;
  Rational value;
};
struct Divide {
  std::string x;
  Participant owner;
  Rational v1, v2;
};
struct Donate {
  std::string x;
  Participant to;
};
struct Destroy {
  std::vector<std::string> xs;
  std::size_t index;  // 0-based
  std::string y;
};
}  // namespace auth

using AuthAction = std::variant<auth::Commit, auth::Spend, auth::Branch, auth::Join,
                                auth::Divide, auth::Donate, auth::Destroy>;

struct Authorization {
  Participant by;
  AuthAction action;
};

std::string auth_key(const Authorization& a);

struct Configuration {
  std::vector<Deposit> deposits;
  std::vector<ActiveContract> contracts;
  std::vector<Advertisement> adverts;
  std::vector<CommittedSecret> committed;
  std::vector<RevealedSecret> revealed;
  std::vector<Authorization> auths;
  std::vector<Binding> bindings;
  Integer time = 0;
  NameSource names;

  const ActiveContract* find_contract(const std::string& name) const;
  const Deposit* find_deposit(const std::string& name) const;
  bool has_auth(const Authorization& a) const;
  std::set<std::string> contract_names() const;
  Rational total_value() const;
};

/// Well-formedness of a configuration; returns the violated invariants.
std::vector<std::string> check_configuration(const Configuration& cfg);

/// Deposits for every named root deposit and root deposit variable, plus
/// `wallet_copies` deposits matching each equation's deposit atoms.
Configuration initial_configuration(const ContractSpec& spec, std::size_t wallet_copies = 2);

/// Renaming-invariant rendering of the whole configuration: generated
/// contract and deposit names are renamed by first occurrence.
std::string canonical_key(const Configuration& cfg);
std::uint64_t config_digest(const Configuration& cfg);
std::string describe(const Configuration& cfg);

// ---------------------------------------------------------------------------
// Labels

namespace label {
struct Adv {
  Advertisement adv;
};
struct AdvRngt {
  std::string x;
  Guarded branch;
  Advertisement adv;  // adv.renegotiates == x
};
struct AuthCommit {
  Participant by;
  Advertisement adv;
  std::vector<std::pair<std::string, std::optional<Integer>>> secrets;
  std::vector<std::pair<std::string, std::string>> bindings;  // var -> deposit
};
struct AuthInitDep {
  Participant by;
  Advertisement adv;
  std::string spent;
};
struct Init {
  Advertisement adv;
};
struct Rngt {
  std::string x;
  Guarded branch;
  Advertisement adv;
};
struct Withdraw {
  Participant to;
  Rational value;
  std::string x;
  Guarded branch;
};
struct Split {
  std::string x;
  Guarded branch;
};
struct AuthRev {
  Participant by;
  std::string secret;
};
/// Carries the consumed contract instead of the fresh continuation name.
struct Rev {
  std::string x;
  Guarded branch;
};
struct AuthBranch {
  Participant by;
  std::string x;
  Guarded branch;
};
struct AuthJoin {
  Participant by;
  std::string x, y;
};
struct Join {
  std::string x, y;
};
struct AuthDivide {
  Participant by;
  std::string x;
  Rational v1, v2;
};
struct Divide {
  std::string x;
  Rational v1, v2;
};
struct AuthDonate {
  Participant by;
  std::string x;
  Participant to;
};
struct Donate {
  std::string x;
  Participant to;
};
struct AuthDestroy {
  Participant by;
  std::vector<std::string> xs;
  std::size_t index;
};
struct Destroy {
  std::vector<std::string> xs;
};
struct Delay {
  Integer delta;
};
}  // namespace label

using Label =
    std::variant<label::Adv, label::AdvRngt, label::AuthCommit, label::AuthInitDep, label::Init,
                 label::Rngt, label::Withdraw, label::Split, label::AuthRev, label::Rev,
                 label::AuthBranch, label::AuthJoin, label::Join, label::AuthDivide,
                 label::Divide, label::AuthDonate, label::Donate, label::AuthDestroy,
                 label::Destroy, label::Delay>;

std::string to_string(const Label& l);
std::string rule_name(const Label& l);
/// The participant of an A:... label; nullopt for labels anyone can fire.
std::optional<Participant> restricted_to(const Label& l);
bool is_participant_restricted(const Label& l);
/// The contract a label consumes, if any.
std::optional<std::string> consumed_contract(const Label& l);
/// True iff l is in the label set of the given observers: every label except
/// B:... with B outside the set.
bool in_label_set(const Label& l, const std::set<Participant>& observers);

// ---------------------------------------------------------------------------
// Semantics

class RuleNotEnabled : public Error {
 public:
  RuleNotEnabled(std::string rule, std::string premise)
      : Error(rule + " not enabled: " + premise),
        rule_(std::move(rule)),
        premise_(std::move(premise)) {}
  const std::string& rule() const { return rule_; }
  const std::string& premise() const { return premise_; }

 private:
  std::string rule_, premise_;
};

struct EnumOptions {
  std::vector<Integer> secret_values = {0, 1, 2};
  bool allow_bottom = true;  // dishonest participants may commit an ill-formed secret
  bool deposit_moves = true;
  bool destroy = false;
  bool delays = true;
  bool advertise = true;
  bool renegotiate = true;
  /// When set, participant-restricted labels are offered only for these.
  std::optional<std::set<Participant>> only;
};

struct Move {
  Label label;
  Configuration next;
};

/// Fresh names come from cfg.names; the returned configuration carries the
/// advanced counter.
Configuration apply_step(const Configuration& cfg, const Label& l, const ContractSpec& spec);

std::vector<Move> enumerate_moves(const Configuration& cfg, const ContractSpec& spec,
                                  const EnumOptions& opts = {});

/// Delays offered by the enumeration policy: to the next strictly greater
/// deadline, and one step past the last deadline.
std::vector<Integer> delay_candidates(const Configuration& cfg);

/// The values a revealed or committed secret carries in cfg, for predicates.
Revealed revealed_values(const Configuration& cfg);

// ---------------------------------------------------------------------------
// Runs

struct Step {
  Label label;
  Configuration config;
};

struct Run {
  Configuration initial;
  std::vector<Step> steps;

  const Configuration& last() const { return steps.empty() ? initial : steps.back().config; }
  void push(const Label& l, const ContractSpec& spec);
};

/// Partial origin function; names keep the origin they were assigned when
/// introduced, even after being consumed.
std::optional<std::string> origin(const Run& run, const std::string& x);
std::set<std::string> descendants(const Run& run, const std::set<std::string>& xs);

struct Policy {
  enum class Kind { Uniform, Progress, Only };
  Kind kind = Kind::Uniform;
  std::set<Participant> only;  // Kind::Only
  double bottom_probability = 0.2;
  bool deposit_moves = true;

  /// "uniform", "progress", or "only:A[,B]".
  static Policy parse(const std::string& text);
  std::string name() const;
};

Run random_run(const Configuration& start, const ContractSpec& spec, std::size_t depth,
               std::uint64_t seed, const Policy& policy = {});

/// Advertises, commits, authorizes and initializes spec.root. Secret values
/// come from `value_of` (nullopt commits an ill-formed secret). Returns the
/// run and the name of the new contract.
struct Stipulation {
  Run run;
  std::string contract;
};
Stipulation stipulate_root(const ContractSpec& spec,
                           const std::map<std::string, std::optional<Integer>>& values = {},
                           std::size_t wallet_copies = 2);

// ---------------------------------------------------------------------------
// Traces

/// One JSON object per line: {"label", "config_digest", "time"}. The first
/// line describes the initial configuration and has a null label.
void write_trace(const Run& run, std::ostream& out);

/// Re-executes a trace from `start`, matching each label against the enabled
/// moves. Returns an empty string on success, else the first discrepancy.
std::string replay_trace(const Configuration& start, const ContractSpec& spec,
                         std::istream& in, const EnumOptions& opts = {});

}  // namespace bitml
