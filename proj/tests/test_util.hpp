#pragma once

#include "bitml/parser.hpp"

#include <string>

namespace bitml::test {

inline Participant P(const std::string& name) { return Participant{name}; }

inline std::string corpus_path(const std::string& file) {
  return std::string(BITML_CORPUS_DIR) + "/" + file;
}

inline ContractSpec corpus_spec(const std::string& file) {
  return load_spec_file(corpus_path(file));
}

inline bool has_violation(const std::vector<Violation>& vs, const std::string& fragment) {
  for (const auto& v : vs)
    if (v.message.find(fragment) != std::string::npos) return true;
  return false;
}

}  // namespace bitml::test

#include "bitml/concrete.hpp"

namespace bitml::test {

/// Stipulates spec.root and then drives one renegotiation of the root
/// contract to completion. Returns the run from the stipulated
/// configuration and the stipulated contract's name.
inline std::pair<Run, std::string> renegotiate_once(const ContractSpec& spec) {
  const Stipulation st = stipulate_root(spec);
  Run run{st.run.last(), {}};
  EnumOptions opts;
  opts.allow_bottom = false;
  opts.deposit_moves = false;
  opts.delays = false;
  opts.advertise = false;
  // Most advanced step first: renegotiate, authorize, commit, advertise.
  const std::vector<std::size_t> order{5, 3, 2, 1};
  for (int guard = 0; guard < 50; ++guard) {
    auto moves = enumerate_moves(run.last(), spec, opts);
    const Move* pick = nullptr;
    for (auto idx : order) {
      for (const auto& m : moves)
        if (m.label.index() == idx) {
          pick = &m;
          break;
        }
      if (pick) break;
    }
    if (!pick) break;
    run.steps.push_back({pick->label, pick->next});
    if (std::holds_alternative<label::Rngt>(pick->label)) break;
  }
  return {run, st.contract};
}

}  // namespace bitml::test
