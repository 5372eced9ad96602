#pragma once

#include "bitml/ast.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bitml {

struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

struct ParseError {
  SourceSpan span;
  std::string message;
  std::vector<std::string> expected;

  /// "line:col: message"
  std::string format() const;
};

struct ParseResult {
  std::optional<ContractSpec> spec;
  std::vector<ParseError> errors;

  bool ok() const { return spec.has_value() && errors.empty(); }
};

/// Parses the s-expression surface syntax and runs all well-formedness
/// checks. Never throws on malformed input.
ParseResult parse_spec(std::string_view text);

/// Like parse_spec, but throws Error with every message joined.
ContractSpec parse_spec_or_throw(std::string_view text);

ContractSpec load_spec_file(const std::string& path);

/// Indented, reparseable rendering.
std::string pretty_print(const ContractSpec& spec);

/// One form per line, no indentation. Two specs are structurally equal iff
/// their compact renderings are equal.
std::string print_compact(const ContractSpec& spec);

std::string print_contract(const Contract& c);
std::string print_advertisement(const Advertisement& adv);

}  // namespace bitml
