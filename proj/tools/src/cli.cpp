#include "warpsim_cli/cli.hpp"

#include <chrono>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "warpsim/corpus.hpp"
#include "warpsim/report.hpp"
#include "warpsim/scop.hpp"
#include "warpsim/simulate.hpp"
#include "warpsim/warp.hpp"

namespace warpsim::cli {

namespace {

struct RunConfig {
  std::string program_path;
  std::string kernel;
  std::string size = "small";
  std::string cache_path;
  std::string mode = "compare";
  std::string output = "json";
  bool self_check = false;
  bool per_node = false;
  bool dump_state = false;
  bool list_kernels = false;
  std::string warp_log;
};

class Usage : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Usage("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int execute(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  if (rc.list_kernels) {
    for (const auto& k : corpus_list()) out << k << '\n';
    return kOk;
  }
  if (rc.program_path.empty() == rc.kernel.empty()) throw Usage("exactly one of --program and --kernel is required");

  HierarchyConfig cfg = parse_cache_config(read_file(rc.cache_path));
  std::string text = rc.kernel.empty() ? read_file(rc.program_path) : corpus_get(rc.kernel, rc.size);
  ParseOptions po;
  po.line_size = cfg.levels.front().line_size;
  po.validate = false;
  Program prog = parse_program(text, po);
  auto diags = analyze(prog, po);
  bool bad = false;
  for (const auto& d : diags) {
    err << d.str() << '\n';
    bad |= d.severity == Diagnostic::Severity::Error;
  }
  if (bad) return kInvalid;

  std::optional<std::ofstream> log;
  if (!rc.warp_log.empty()) {
    log.emplace(rc.warp_log);
    if (!*log) throw Usage("cannot write '" + rc.warp_log + "'");
  }

  Report rep;
  rep.mode = rc.mode;
  rep.program = rc.kernel.empty() ? rc.program_path : rc.kernel + ":" + rc.size;
  rep.cache = cfg;
  std::optional<HierarchyState> warp_state, plain_state;
  int status = kOk;

  if (rc.mode == "warp" || rc.mode == "compare") {
    WarpOptions wo;
    wo.self_check = rc.self_check;
    wo.per_node = rc.per_node;
    EngineReport e;
    e.engine = "warp";
    wo.on_event = [&](const WarpEvent& ev) {
      if (!ev.reason.empty()) ++e.warps_declined;
      if (log) *log << warp_event_json(ev) << '\n';
    };
    auto t0 = std::chrono::steady_clock::now();
    WarpResult r = simulate_warping(prog, cfg, nullptr, wo);
    e.wall_ms = ms_since(t0);
    e.stats = r.stats;
    e.self_checks = r.self_checks;
    e.self_check_failures = r.self_check_failures;
    for (const auto& m : r.self_check_messages) err << "self-check: " << m << '\n';
    if (r.self_check_failures) status = kMismatch;
    warp_state = std::move(r.state);
    rep.engines.push_back(std::move(e));
  }
  if (rc.mode == "nowarp" || rc.mode == "compare") {
    SimOptions so;
    so.per_node = rc.per_node;
    EngineReport e;
    e.engine = "nowarp";
    auto t0 = std::chrono::steady_clock::now();
    SimResult r = simulate_nonwarping(prog, cfg, nullptr, so);
    e.wall_ms = ms_since(t0);
    e.stats = r.stats;
    plain_state = std::move(r.state);
    rep.engines.push_back(std::move(e));
  }
  if (rc.mode == "compare") {
    rep.compared = true;
    rep.counts_equal = rep.engines[0].stats.same_counts(rep.engines[1].stats) &&
                       rep.engines[0].stats.total_accesses() == rep.engines[1].stats.total_accesses();
    rep.states_equal = *warp_state == *plain_state;
    if (!rep.counts_equal || !rep.states_equal) {
      err << "compare: engines disagree (" << (rep.counts_equal ? "final state" : "counts") << ")\n";
      status = kMismatch;
    }
  }
  if (rc.dump_state) rep.final_state = warp_state ? &*warp_state : &*plain_state;

  out << (rc.output == "csv" ? report_csv(rep) : report_json(rep) + "\n");
  return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app("Warping cache simulator for affine loop nests", "warpsim");
  auto* prog = app.add_option("--program", rc.program_path, "Program JSON file");
  app.add_option("--kernel", rc.kernel, "Bundled kernel instead of --program")->excludes(prog);
  app.add_option("--size", rc.size, "Bundled kernel size")->check(CLI::IsMember({"small", "medium"}));
  auto* cache = app.add_option("--cache", rc.cache_path, "Cache configuration JSON file");
  app.add_option("--mode", rc.mode, "warp, nowarp or compare")->check(CLI::IsMember({"warp", "nowarp", "compare"}));
  app.add_option("--output", rc.output, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--self-check", rc.self_check, "Replay every warp explicitly and compare");
  app.add_flag("--per-node", rc.per_node, "Report first-level misses per access node");
  app.add_option("--warp-log", rc.warp_log, "Write warp events as JSON lines");
  app.add_flag("--dump-state", rc.dump_state, "Include the final concrete cache state");
  auto* list = app.add_flag("--list-kernels", rc.list_kernels, "List bundled kernels and exit");
  cache->excludes(list);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
    if (!rc.list_kernels && rc.cache_path.empty()) throw Usage("--cache is required");
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "warpsim: " << e.what() << '\n';
    return kUsage;
  } catch (const Usage& e) {
    err << "warpsim: " << e.what() << '\n';
    return kUsage;
  }

  try {
    return execute(rc, out, err);
  } catch (const Usage& e) {
    err << "warpsim: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "warpsim: " << e.what() << '\n';
    return kUsage;
  } catch (const UnknownKernel& e) {
    err << "warpsim: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    for (const auto& d : e.diagnostics()) err << d.str() << '\n';
    return kInvalid;
  } catch (const ConfigError& e) {
    err << "warpsim: invalid cache configuration: " << e.what() << '\n';
    return kInvalid;
  } catch (const Error& e) {
    err << "warpsim: " << e.what() << '\n';
    return kInvalid;
  }
}

}  // namespace warpsim::cli
