#include "lumiswarm/cli.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "lumiswarm/error.hpp"
#include "lumiswarm/server.hpp"
#include "lumiswarm/verify.hpp"
#include "lumiswarm/vessels.hpp"

namespace lumiswarm {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
  std::optional<double> epsGeom, epsColl;
};

void addCommon(CLI::App* app, Common& c, bool withConfig = true) {
  if (withConfig) app->add_option("--config", c.config, "run config (JSON)")->required();
  app->add_option("--seed", c.seed, "top-level seed override");
  app->add_option("--out", c.out, "output file");
  app->add_flag("--quiet", c.quiet, "suppress the summary");
  app->add_option("--eps-geom", c.epsGeom, "geometric tolerance factor");
  app->add_option("--eps-coll", c.epsColl, "collision tolerance factor (times the initial hull diameter)");
}

RunConfig loadWithOverrides(const Common& c) {
  RunConfig cfg = loadRunConfig(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.epsGeom) cfg.tolerances.epsGeom = *c.epsGeom;
  if (c.epsColl) cfg.tolerances.epsColl = *c.epsColl;
  return cfg;
}

int exitFor(Outcome o) {
  switch (o) {
    case Outcome::Solved: return kExitSolved;
    case Outcome::InvariantViolation: return kExitViolation;
    case Outcome::CapExceeded: return kExitCap;
  }
  return kExitCap;
}

std::string describe(const Verdict& v) {
  std::ostringstream s;
  s << toString(v.outcome);
  if (v.violation) {
    s << " " << v.violation->kind << " at t=" << v.violation->time << " robots";
    for (int r : v.violation->robots) s << " " << r;
    if (!v.violation->detail.empty()) s << " (" << v.violation->detail << ")";
  }
  if (v.outcome == Outcome::CapExceeded) s << " " << v.reason;
  s << " steps=" << v.stats.steps;
  return s.str();
}

fs::path tracePath(const std::string& out, const RunConfig& cfg) {
  fs::path file = out.empty() ? fs::path(cfg.protocol + "-" + std::string(toString(cfg.scheduler)) + "-seed" +
                                         std::to_string(cfg.seed) + ".jsonl")
                              : fs::path(out);
  if (const char* dir = std::getenv("LUMISWARM_TRACE_DIR"); dir && *dir) file = fs::path(dir) / file.filename();
  return file;
}

void writeFile(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::ConfigInvalid, "cannot write '" + p.string() + "'");
  f << text;
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

int cmdRun(const Common& c, std::ostream& out) {
  RunConfig cfg = loadWithOverrides(c);
  RunResult r = runExperiment(cfg);
  fs::path path = tracePath(c.out, cfg);
  writeFile(path, r.trace.text());
  if (!c.quiet) out << describe(r.verdict) << "\ntrace: " << path.string() << "\n";
  return exitFor(r.verdict.outcome);
}

int cmdSweep(const Common& c, const std::string& range, int jobs, std::ostream& out) {
  auto colon = range.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "--seeds expects A:B");
  const std::uint64_t a = std::stoull(range.substr(0, colon)), b = std::stoull(range.substr(colon + 1));
  RunConfig base = loadWithOverrides(c);
  const std::size_t count = b > a ? b - a : 0;
  std::vector<std::string> rows(count);
  std::vector<int> solved(count, 0);
  std::atomic<std::size_t> next{0};
  const char* traceDir = std::getenv("LUMISWARM_TRACE_DIR");
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      RunConfig cfg = base;
      cfg.seed = a + i;
      std::ostringstream row;
      try {
        RunResult r = runExperiment(cfg);
        if (traceDir && *traceDir) writeFile(tracePath({}, cfg), r.trace.text());
        const Verdict& v = r.verdict;
        auto last = [](const auto& s) { return s.empty() ? std::string() : fmt(s.back()); };
        row << cfg.seed << "," << toString(v.outcome) << "," << (v.violation ? v.violation->kind : v.reason) << ","
            << v.stats.steps << "," << last(v.stats.hullArea) << "," << last(v.stats.hullDiameter) << ","
            << (v.stats.vertexCount.empty() ? std::string() : std::to_string(v.stats.vertexCount.back())) << ","
            << last(v.stats.shortestInteriorEdge);
        solved[i] = v.outcome == Outcome::Solved;
      } catch (const Error& e) {
        row << cfg.seed << ",Error," << toString(e.code()) << ",,,,,";
      }
      rows[i] = row.str();
    }
  };
  jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream table;
  table << "seed,verdict,detail,steps,hullArea,hullDiameter,vertexCount,shortestInteriorEdge\n";
  for (const auto& r : rows) table << r << "\n";
  int pass = 0;
  for (int s : solved) pass += s;
  table << "# pass rate " << pass << "/" << count << "\n";
  if (!c.out.empty()) writeFile(tracePath(c.out, base), table.str());
  if (!c.quiet || c.out.empty()) out << table.str();
  return 0;
}

int cmdReplay(const std::string& path, bool quiet, std::ostream& out, std::ostream& err) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    err << "cannot read trace '" << path << "'\n";
    return kExitConfigError;
  }
  std::stringstream buf;
  buf << f.rdbuf();
  ReplayResult r;
  try {
    r = replayTrace(buf.str());
  } catch (const Error& e) {
    err << "replay failed: " << e.what() << "\n";
    return kExitReplayMismatch;
  }
  if (!quiet) out << describe(r.verdict) << "\nreplay: " << r.message << "\n";
  if (!r.checksumOk || !r.matches) return kExitReplayMismatch;
  return exitFor(r.verdict.outcome);
}

int cmdVessels(int n, long steps, std::uint64_t seed, const std::string& schedule, std::ostream& out) {
  if (n < 2) throw Error(ErrorCode::ConfigInvalid, "--n must be at least 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  VesselState w(n);
  for (double& x : w) x = unit(rng);
  std::optional<ValveSchedule> sched;
  if (schedule == "all-open") sched.emplace(ValveSchedule::Kind::AllOpen, n);
  else if (schedule == "random") sched.emplace(ValveSchedule::Kind::RandomFair, n, deriveSeed(seed, 0x5E));
  else if (schedule.rfind("closed:", 0) == 0) {
    std::size_t k = std::stoul(schedule.substr(7));
    if (k >= static_cast<std::size_t>(n)) throw Error(ErrorCode::ConfigInvalid, "closed valve out of range");
    sched.emplace(ValveSchedule::Kind::RandomFair, n, deriveSeed(seed, 0x5E), std::set<std::size_t>{k});
  } else {
    throw Error(ErrorCode::ConfigInvalid, "--schedule must be all-open, random or closed:k");
  }
  out << "t";
  for (int i = 0; i < n; ++i) out << ",w" << i;
  out << ",energy,lhs,rhs\n";
  for (long t = 0; t <= steps; ++t) {
    std::vector<bool> valves = sched->next();
    EnergyCheck chk = checkEnergyInequality(w, valves);
    out << t;
    for (double x : w) out << "," << fmt(x);
    out << "," << fmt(energy(w)) << "," << fmt(chk.lhs) << "," << fmt(chk.rhs) << "\n";
    w = vesselsStep(w, valves);
  }
  return 0;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lumiswarm: luminous robot simulation, verification and playground"};
  app.require_subcommand(1);

  Common runOpts, sweepOpts;
  auto* run = app.add_subcommand("run", "run one experiment and write its trace");
  addCommon(run, runOpts);

  auto* sweep = app.add_subcommand("sweep", "run a config over a seed range");
  addCommon(sweep, sweepOpts);
  std::string seeds;
  int jobs = 1;
  sweep->add_option("--seeds", seeds, "half-open range A:B")->required();
  sweep->add_option("--jobs", jobs, "parallel runs");

  auto* replay = app.add_subcommand("replay", "re-check a persisted trace");
  std::string tracePathArg;
  bool replayQuiet = false;
  replay->add_option("trace,--trace", tracePathArg, "trace file")->required();
  replay->add_flag("--quiet", replayQuiet);

  auto* vessels = app.add_subcommand("vessels", "communicating vessels as CSV");
  int vn = 8;
  long vsteps = 100;
  std::uint64_t vseed = 1;
  std::string vschedule = "all-open";
  vessels->add_option("--n", vn);
  vessels->add_option("--steps", vsteps);
  vessels->add_option("--seed", vseed);
  vessels->add_option("--schedule", vschedule, "all-open | random | closed:k");

  auto* serve = app.add_subcommand("serve", "playground WebSocket server on /session");
  int port = 7341;
  serve->add_option("--port", port);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (*run) return cmdRun(runOpts, out);
    if (*sweep) return cmdSweep(sweepOpts, seeds, jobs, out);
    if (*replay) return cmdReplay(tracePathArg, replayQuiet, out, err);
    if (*vessels) return cmdVessels(vn, vsteps, vseed, vschedule, out);
    if (*serve) return serveSessions(static_cast<unsigned short>(port), out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace lumiswarm
