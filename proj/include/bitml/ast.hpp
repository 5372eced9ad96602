#pragma once

#include "bitml/core.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bitml {

// ---------------------------------------------------------------------------
// Static expressions: integer constants, integer variables, + - *.

struct StaticNode;
using StaticExpr = std::shared_ptr<const StaticNode>;

struct StaticNode {
  enum class Kind { Const, Var, Add, Sub, Mul };
  Kind kind;
  Integer value;
  std::string var;
  StaticExpr lhs, rhs;
  std::string key;
};

StaticExpr sconst(const Integer& k);
StaticExpr svar(const std::string& name);
StaticExpr sbin(StaticNode::Kind op, StaticExpr lhs, StaticExpr rhs);

using Env = std::map<std::string, Integer>;

Integer eval_static(const StaticExpr& e, const Env& env);
void free_vars(const StaticExpr& e, std::set<std::string>& out);

// ---------------------------------------------------------------------------
// Predicates over revealed secrets.

struct ArithNode;
using ArithExpr = std::shared_ptr<const ArithNode>;

struct ArithNode {
  enum class Kind { Static, Secret, Add, Sub };
  Kind kind;
  StaticExpr sexpr;
  std::string secret;
  ArithExpr lhs, rhs;
  std::string key;
};

ArithExpr astatic(StaticExpr e);
ArithExpr asecret(const std::string& name);
/// Builds e1 + e2 / e1 - e2, folding into a static expression when both
/// operands are static. The parser and the `between` sugar both go through
/// here, so printed output reparses to the same tree.
ArithExpr aadd(ArithExpr lhs, ArithExpr rhs);
ArithExpr asub(ArithExpr lhs, ArithExpr rhs);

struct PredNode;
using Predicate = std::shared_ptr<const PredNode>;

struct PredNode {
  enum class Kind { True, And, Not, Eq, Lt };
  Kind kind;
  Predicate p, q;
  ArithExpr lhs, rhs;
  std::string key;
};

Predicate ptrue();
Predicate pand(Predicate p, Predicate q);
Predicate pnot(Predicate p);
Predicate peq(ArithExpr lhs, ArithExpr rhs);
Predicate plt(ArithExpr lhs, ArithExpr rhs);
/// lo <= x <= hi, i.e. not(x < lo) and x < hi + 1.
Predicate pbetween(ArithExpr lo, ArithExpr x, ArithExpr hi);

bool is_true(const Predicate& p);
void pred_secrets(const Predicate& p, std::set<std::string>& out);

using Revealed = std::map<std::string, Integer>;

/// Static sub-expressions are evaluated under an empty environment.
bool eval_pred(const Predicate& p, const Revealed& revealed);
Integer eval_arith(const ArithExpr& e, const Revealed& revealed);

// ---------------------------------------------------------------------------
// Contracts.

struct GuardedNode;
using Guarded = std::shared_ptr<const GuardedNode>;

/// A choice of guarded branches, kept sorted by structural key.
class Contract {
 public:
  Contract();
  explicit Contract(std::vector<Guarded> branches);

  const std::vector<Guarded>& branches() const { return node_->branches; }
  const std::string& key() const { return node_->key; }
  bool empty() const { return node_->branches.empty(); }

  friend bool operator==(const Contract& a, const Contract& b) {
    return a.node_ == b.node_ || a.key() == b.key();
  }

 private:
  struct Node {
    std::vector<Guarded> branches;
    std::string key;
  };
  std::shared_ptr<const Node> node_;
};

struct SplitBranch {
  Rational weight;
  Contract body;
};

struct GuardedNode {
  enum class Kind { Withdraw, Put, Split, Rngt };

  // Decorations in normal form.
  std::set<Participant> auths;
  std::vector<StaticExpr> afters;  // sorted and deduplicated by key

  Kind kind;
  Participant to;                    // Withdraw
  std::vector<std::string> secrets;  // Put
  Predicate pred;                    // Put
  Contract cont;                     // Put
  std::vector<SplitBranch> parts;    // Split
  std::string var;                   // Rngt
  std::vector<StaticExpr> args;      // Rngt

  std::string key;

  bool decorated() const { return !auths.empty() || !afters.empty(); }
};

Guarded gwithdraw(const Participant& to);
Guarded gput(std::vector<std::string> secrets, Predicate pred, Contract cont);
Guarded gsplit(std::vector<SplitBranch> parts);
Guarded grngt(const std::string& var, std::vector<StaticExpr> args);
Guarded gauth(const Participant& by, const Guarded& inner);
Guarded gafter(const StaticExpr& t, const Guarded& inner);
/// Same action and decorations as g, with the given decorations replaced.
Guarded with_decorations(const Guarded& g, std::set<Participant> auths,
                         std::vector<StaticExpr> afters);

Contract choice(std::vector<Guarded> branches);
Contract single(Guarded g);

// ---------------------------------------------------------------------------
// Preconditions and advertisements.

struct DepositRef {
  bool is_var = false;
  std::string name;

  friend bool operator==(const DepositRef&, const DepositRef&) = default;
};

struct PreAtom {
  enum class Kind { Deposit, Secret };
  Kind kind;
  Participant owner;
  Rational value;      // Deposit
  DepositRef ref;      // Deposit
  std::string secret;  // Secret
};

using Precondition = std::vector<PreAtom>;

PreAtom deposit_atom(const Participant& owner, const Rational& v, DepositRef ref);
PreAtom secret_atom(const Participant& owner, const std::string& secret);

struct Advertisement {
  Precondition pre;
  Contract contract;
  std::optional<std::string> renegotiates;  // contract name x of G;C^x
};

/// Participants owning an atom of G.
std::set<Participant> pre_participants(const Precondition& pre);
std::vector<std::string> pre_secrets(const Precondition& pre);

std::string key_of(const Advertisement& adv);
std::string key_of(const Precondition& pre);
std::string key_of(const PreAtom& atom);

struct Equation {
  std::string var;
  std::vector<std::string> params;
  Advertisement body;
};

using Equations = std::map<std::string, Equation>;

struct ContractSpec {
  std::vector<Participant> participants;
  std::set<Participant> honest;
  std::vector<std::string> equation_order;  // definition order, for printing
  Equations equations;
  Advertisement root;

  /// Owner of each secret name declared anywhere in the spec.
  std::map<std::string, Participant> secret_owners() const;
};

/// Strips the ":N" suffix that fresh names carry.
std::string base_name(const std::string& name);

/// Owner lookup that also resolves freshly renamed secrets ("a:7" -> a).
std::optional<Participant> owner_of_secret(
    const std::map<std::string, Participant>& owners, const std::string& secret);

// ---------------------------------------------------------------------------
// Well-formedness.

enum class AdvertRole { Stipulation, EquationBody };

struct Violation {
  int clause;  // 1..4 for the advertisement clauses, 0 for contract-level
  std::string message;
  std::string location;
};

std::vector<Violation> check_advertisement(const Advertisement& adv,
                                           const Equations& equations,
                                           AdvertRole role = AdvertRole::Stipulation,
                                           const std::vector<std::string>& params = {});

/// Spec-level checks: honest set, secret ownership, root and equations.
std::vector<Violation> check_spec(const ContractSpec& spec);

// ---------------------------------------------------------------------------
// Fresh names.

class NameSource {
 public:
  NameSource() = default;
  explicit NameSource(std::uint64_t next) : next_(next) {}

  /// Returns "<cls>:<counter>".
  std::string fresh(const std::string& cls);
  /// Ensures later names never collide with `name` if it has our format.
  void observe(const std::string& name);
  std::uint64_t peek() const { return next_; }

 private:
  std::uint64_t next_ = 0;
};

// ---------------------------------------------------------------------------
// Substitution, instantiation and alpha-equivalence.

/// Replaces integer variables by their values and folds every static
/// expression to a constant.
Contract evaluate_contract(const Contract& c, const Env& env);

/// Renames secret names inside contract terms.
Contract rename_secrets(const Contract& c, const std::map<std::string, std::string>& ren);

Advertisement instantiate_equation(const std::string& var,
                                   const std::vector<Integer>& args,
                                   const Equations& equations, NameSource& fresh);

/// Canonical form with secrets renamed $s0.. and deposit variables $v0.. by
/// first occurrence in the precondition.
std::string alpha_key(const Advertisement& adv);
bool alpha_equiv(const Advertisement& a, const Advertisement& b);

// Evaluated after-deadlines of every decoration occurring in c.
void collect_deadlines(const Contract& c, std::set<Integer>& out);

/// Number of nested guarded layers, used for sizing bounded searches.
std::size_t contract_depth(const Contract& c);

}  // namespace bitml
