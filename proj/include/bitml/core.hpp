#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bitml {

/// Arbitrary-precision integers: static expressions, times and secret values.
using Integer = boost::multiprecision::cpp_int;

/// Exact BTC amounts and split weights.
using Rational = boost::multiprecision::cpp_rational;

std::string to_string(const Integer& value);

/// Renders "n" for integral values and "n/d" otherwise.
std::string to_string(const Rational& value);

/// Parses "n" or "n/d" (d > 0). Returns false on malformed input.
bool parse_rational(std::string_view text, Rational& out);
bool parse_integer(std::string_view text, Integer& out);

/// Identifier wrapper; the tag keeps participants, deposit names, recursion
/// variables and contract names from being mixed up.
template <class Tag>
struct Name {
  std::string value;

  friend auto operator<=>(const Name&, const Name&) = default;
  friend bool operator==(const Name&, const Name&) = default;
};

using Participant = Name<struct ParticipantTag>;
using DepositName = Name<struct DepositNameTag>;
using DepositVar = Name<struct DepositVarTag>;
using RecVar = Name<struct RecVarTag>;
using ContractName = Name<struct ContractNameTag>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error("unbound variable " + name), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class UnrevealedSecret : public Error {
 public:
  explicit UnrevealedSecret(const std::string& name)
      : Error("secret " + name + " has not been revealed"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class UnknownEquation : public Error {
 public:
  explicit UnknownEquation(const std::string& var)
      : Error("unknown recursion variable " + var) {}
};

class ArityMismatch : public Error {
 public:
  ArityMismatch(const std::string& var, std::size_t expected, std::size_t got)
      : Error("recursion variable " + var + " expects " +
              std::to_string(expected) + " argument(s), got " +
              std::to_string(got)) {}
};

/// 64-bit FNV-1a, used for state and configuration digests.
std::uint64_t fnv1a(std::string_view data);
std::string hex_digest(std::uint64_t digest);

}  // namespace bitml
