#pragma once

#include "bitml/liquidity.hpp"

#include <string>
#include <vector>

namespace bitml {

struct ManifestEntry {
  std::string file;
  std::vector<std::string> observers;
  bool expect_liquid = true;
  std::string citation;
};

/// Reads a JSON array of {file, observer: [..], expect: "liquid"|"nonliquid", citation}.
std::vector<ManifestEntry> load_manifest(const std::string& path);
std::vector<ManifestEntry> corpus_contents(const std::string& corpus_dir);

/// Observer names as participants; throws if one is not declared in spec.
std::set<Participant> resolve_observers(const ContractSpec& spec,
                                        const std::vector<std::string>& names);

struct EntryResult {
  ManifestEntry entry;
  std::optional<Verdict> verdict;
  std::string error;  // set when the entry could not be checked
  double seconds = 0;

  bool matches() const { return verdict && verdict->liquid == entry.expect_liquid; }
};

EntryResult run_entry(const std::string& corpus_dir, const ManifestEntry& entry,
                      std::size_t cap = default_state_cap());

/// Entries run concurrently; results keep manifest order.
std::vector<EntryResult> run_manifest(const std::string& corpus_dir,
                                      const std::vector<ManifestEntry>& entries,
                                      std::size_t cap = default_state_cap(), bool parallel = true);

/// Every .bitml file in the directory, sorted by name.
std::vector<std::string> corpus_files(const std::string& corpus_dir);

}  // namespace bitml
