#include "bitml/corpus.hpp"

#include "bitml/parser.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>

namespace bitml {

using nlohmann::json;

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("manifest " + path + ": " + e.what());
  }
  if (!j.is_array()) throw Error("manifest " + path + ": expected a JSON array");
  std::vector<ManifestEntry> out;
  for (const auto& e : j) {
    ManifestEntry m;
    try {
      m.file = e.at("file").get<std::string>();
      m.observers = e.at("observer").get<std::vector<std::string>>();
      const auto expect = e.at("expect").get<std::string>();
      if (expect != "liquid" && expect != "nonliquid")
        throw Error("expect must be \"liquid\" or \"nonliquid\", got \"" + expect + "\"");
      m.expect_liquid = expect == "liquid";
      m.citation = e.value("citation", std::string());
    } catch (const json::exception& ex) {
      throw Error("manifest " + path + ": " + ex.what());
    }
    if (m.observers.empty()) throw Error("manifest " + path + ": empty observer list for " + m.file);
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ManifestEntry> corpus_contents(const std::string& corpus_dir) {
  return load_manifest((std::filesystem::path(corpus_dir) / "manifest.json").string());
}

std::set<Participant> resolve_observers(const ContractSpec& spec,
                                        const std::vector<std::string>& names) {
  std::set<Participant> out;
  for (const auto& n : names) {
    Participant p{n};
    if (std::find(spec.participants.begin(), spec.participants.end(), p) ==
        spec.participants.end())
      throw Error("observer " + n + " is not a participant");
    out.insert(p);
  }
  if (out.empty()) throw Error("no observer given");
  return out;
}

EntryResult run_entry(const std::string& corpus_dir, const ManifestEntry& entry,
                      std::size_t cap) {
  EntryResult r;
  r.entry = entry;
  const auto start = std::chrono::steady_clock::now();
  try {
    const ContractSpec spec =
        load_spec_file((std::filesystem::path(corpus_dir) / entry.file).string());
    LiquidityProblem problem{spec, resolve_observers(spec, entry.observers)};
    r.verdict = check_liquidity(problem, entry.file, cap);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<EntryResult> run_manifest(const std::string& corpus_dir,
                                      const std::vector<ManifestEntry>& entries, std::size_t cap,
                                      bool parallel) {
  std::vector<EntryResult> out;
  if (!parallel) {
    for (const auto& e : entries) out.push_back(run_entry(corpus_dir, e, cap));
    return out;
  }
  std::vector<std::future<EntryResult>> fs;
  for (const auto& e : entries)
    fs.push_back(std::async(std::launch::async, run_entry, corpus_dir, e, cap));
  for (auto& f : fs) out.push_back(f.get());
  return out;
}

std::vector<std::string> corpus_files(const std::string& corpus_dir) {
  std::vector<std::string> out;
  for (const auto& de : std::filesystem::directory_iterator(corpus_dir))
    if (de.is_regular_file() && de.path().extension() == ".bitml")
      out.push_back(de.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace bitml
