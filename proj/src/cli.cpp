#include "bitml/cli.hpp"

#include "bitml/corpus.hpp"
#include "bitml/liquidity.hpp"
#include "bitml/parser.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace bitml {

using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ','))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> flatten_observers(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& r : raw)
    for (auto& p : split_list(r)) out.push_back(std::move(p));
  return out;
}

/// Parse errors are printed with their positions.
ContractSpec load_or_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ParseResult r = parse_spec(ss.str());
  if (!r.ok()) {
    std::string msg;
    for (const auto& e : r.errors) msg += (msg.empty() ? "" : "\n") + path + ":" + e.format();
    throw Error(msg);
  }
  return std::move(*r.spec);
}

std::string join(const std::vector<std::string>& xs, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? sep : "") + xs[i];
  return s;
}

struct CheckArgs {
  std::string file;
  std::vector<std::string> observers;
  std::string format = "text";
  std::size_t cap = 0;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const ContractSpec spec = load_or_report(a.file);
  LiquidityProblem problem{spec, resolve_observers(spec, flatten_observers(a.observers))};
  const Verdict v = check_liquidity(problem, std::filesystem::path(a.file).filename().string(),
                                    a.cap ? a.cap : default_state_cap());
  if (a.format == "json")
    out << verdict_to_json(v).dump(2) << "\n";
  else
    out << explain(v);
  return v.liquid ? kExitOk : kExitNotVerified;
}

struct SimulateArgs {
  std::string file;
  std::uint64_t seed = 0;
  std::size_t depth = 20;
  std::string policy = "uniform";
  std::string trace;
  bool from_initial = false;
};

Configuration start_config(const ContractSpec& spec, bool from_initial) {
  return from_initial ? initial_configuration(spec) : stipulate_root(spec).run.last();
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const ContractSpec spec = load_or_report(a.file);
  const Run run =
      random_run(start_config(spec, a.from_initial), spec, a.depth, a.seed, Policy::parse(a.policy));
  if (!a.trace.empty()) {
    std::ofstream t(a.trace);
    if (!t) throw Error("cannot write " + a.trace);
    write_trace(run, t);
  }
  out << "policy: " << Policy::parse(a.policy).name() << "\n";
  out << "steps: " << run.steps.size() << "\n";
  for (const auto& s : run.steps) out << "  " << to_string(s.label) << "\n";
  out << "final configuration:\n" << describe(run.last());
  return kExitOk;
}

int cmd_replay(const std::string& file, const std::string& trace, bool from_initial,
               std::ostream& out) {
  const ContractSpec spec = load_or_report(file);
  std::ifstream in(trace);
  if (!in) throw Error("cannot open " + trace);
  const std::string diff = replay_trace(start_config(spec, from_initial), spec, in);
  if (!diff.empty()) {
    out << "replay mismatch: " << diff << "\n";
    return kExitNotVerified;
  }
  out << "replay ok\n";
  return kExitOk;
}

int cmd_states(const CheckArgs& a, std::ostream& out, std::ostream& err) {
  const ContractSpec spec = load_or_report(a.file);
  LiquidityProblem problem{spec, resolve_observers(spec, flatten_observers(a.observers))};
  const StateSpace sp = build_state_space(problem, a.cap ? a.cap : default_state_cap());
  out << states_to_json(sp).dump(2) << "\n";
  err << "states: " << sp.states.size() << ", edges: " << sp.edge_count() << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::string dir;
  std::string manifest;
  std::string format = "text";
  std::size_t cap = 0;
  bool sequential = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const std::string manifest =
      a.manifest.empty() ? (std::filesystem::path(a.dir) / "manifest.json").string() : a.manifest;
  const auto entries = load_manifest(manifest);
  const auto results =
      run_manifest(a.dir, entries, a.cap ? a.cap : default_state_cap(), !a.sequential);
  bool all = true;
  auto got = [](const EntryResult& r) -> std::string {
    if (!r.verdict) return "error";
    return r.verdict->liquid ? "liquid" : "nonliquid";
  };
  if (a.format == "json") {
    json j = json::array();
    for (const auto& r : results) {
      all = all && r.matches();
      j.push_back({{"file", r.entry.file},
                   {"observers", r.entry.observers},
                   {"expected", r.entry.expect_liquid ? "liquid" : "nonliquid"},
                   {"got", got(r)},
                   {"match", r.matches()},
                   {"states", r.verdict ? json(r.verdict->states) : json(nullptr)},
                   {"seconds", r.seconds},
                   {"verdict", r.verdict ? verdict_to_json(*r.verdict) : json(nullptr)},
                   {"error", r.error.empty() ? json(nullptr) : json(r.error)}});
    }
    out << j.dump(2) << "\n";
    return all ? kExitOk : kExitNotVerified;
  }
  out << std::left << std::setw(22) << "contract" << std::setw(10) << "observer" << std::setw(11)
      << "expected" << std::setw(11) << "got" << std::setw(9) << "states"
      << "time(s)\n";
  std::vector<std::string> diffs;
  for (const auto& r : results) {
    all = all && r.matches();
    std::ostringstream t;
    t << std::fixed << std::setprecision(3) << r.seconds;
    out << std::left << std::setw(22) << r.entry.file << std::setw(10)
        << join(r.entry.observers, ",") << std::setw(11)
        << (r.entry.expect_liquid ? "liquid" : "nonliquid") << std::setw(11) << got(r)
        << std::setw(9) << (r.verdict ? std::to_string(r.verdict->states) : "-") << t.str()
        << "\n";
    if (!r.matches())
      diffs.push_back(r.entry.file + " [" + join(r.entry.observers, ",") + "]: expected " +
                      (r.entry.expect_liquid ? "liquid" : "nonliquid") + ", got " + got(r) +
                      (r.error.empty() ? "" : " (" + r.error + ")"));
  }
  for (const auto& d : diffs) out << "MISMATCH " << d << "\n";
  out << (all ? "all " : "") << (results.size() - diffs.size()) << "/" << results.size()
      << " entries match\n";
  return all ? kExitOk : kExitNotVerified;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"BitML liquidity checker"};
  app.require_subcommand(1);

  CheckArgs check;
  auto* c = app.add_subcommand("check", "verify liquidity of the root contract");
  c->add_option("file", check.file, "contract file")->required();
  c->add_option("--observer", check.observers, "observer participants, comma separated")
      ->required();
  c->add_option("--format", check.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  c->add_option("--state-cap", check.cap, "maximum number of abstract states");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "random concrete run after stipulation");
  s->add_option("file", sim.file, "contract file")->required();
  s->add_option("--seed", sim.seed, "random seed");
  s->add_option("--depth", sim.depth, "number of steps");
  s->add_option("--policy", sim.policy, "uniform, progress or only:A[,B]");
  s->add_option("--trace", sim.trace, "write a JSON-lines trace");
  s->add_flag("--from-initial", sim.from_initial, "start before the advertisement");

  std::string replay_file, replay_trace_path;
  bool replay_initial = false;
  auto* r = app.add_subcommand("replay", "re-execute a simulate trace");
  r->add_option("file", replay_file, "contract file")->required();
  r->add_option("trace", replay_trace_path, "trace file")->required();
  r->add_flag("--from-initial", replay_initial, "the trace starts before the advertisement");

  CheckArgs states;
  auto* st = app.add_subcommand("states", "dump the finite abstract state space");
  st->add_option("file", states.file, "contract file")->required();
  st->add_option("--observer", states.observers, "observer participants")->required();
  st->add_option("--state-cap", states.cap, "maximum number of abstract states");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "check every manifest entry");
  b->add_option("dir", bench.dir, "corpus directory")->required();
  b->add_option("--manifest", bench.manifest, "manifest path (default dir/manifest.json)");
  b->add_option("--format", bench.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  b->add_option("--state-cap", bench.cap, "maximum number of abstract states per entry");
  b->add_flag("--sequential", bench.sequential, "run entries one at a time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*c) return cmd_check(check, out);
    if (*s) return cmd_simulate(sim, out);
    if (*r) return cmd_replay(replay_file, replay_trace_path, replay_initial, out);
    if (*st) return cmd_states(states, out, err);
    if (*b) return cmd_bench(bench, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace bitml
