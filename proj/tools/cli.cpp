#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "csv.hpp"
#include "tcal/baselines.hpp"
#include "tcal/error.hpp"
#include "tcal/ingest.hpp"
#include "tcal/label_io.hpp"
#include "tcal/metrics.hpp"
#include "tcal/report.hpp"
#include "tcal/synth.hpp"

namespace fs = std::filesystem;

namespace tcal::cli {
namespace {

struct RunConfig {
  std::string subcommand;
  fs::path out_dir = ".";
  std::string loss = "zero-one";
  double low_threshold = kDefaultLowThreshold;
  double high_threshold = kDefaultHighThreshold;
  bool log_x = true;
  bool strict = true;

  std::string log_path;
  std::string baselines_path;
  std::string labels_path;
  std::string eval_path;
  std::size_t memory_budget = std::size_t{256} << 20;

  int width = 720;
  int height = 480;
  std::uint64_t style_seed = 0;
  bool require_scratch = false;
  bool no_bands = false;

  std::string task = "synthetic";
  double blind = 0.9;
  double max_risk = 0.1;
  std::vector<std::string> methods{"scratch:1000:0.5", "pretrained:100:0.5"};
  std::vector<std::uint64_t> regimes{10, 100, 1000, 10000, 100000};
  std::size_t seeds = 3;
  double noise = 0.01;
  std::uint64_t seed = 0;
};

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool has_tclb_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string_view(magic, 4) == "TCLB";
}

// Write-temp-then-rename so readers never see a partial file.
void write_atomic(const fs::path& path, std::string_view contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename to '" + path.string() + "': " + ec.message());
}

// Re-raises a parse error with the offending file named.
template <typename F>
auto with_file(const std::string& path, F&& parse) {
  try {
    return parse();
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

class Run {
 public:
  Run(const RunConfig& cfg, std::ostream& out, std::ostream& err) : cfg_(cfg), out_(out), err_(err) {}

  std::string input(const std::string& path) {
    std::string bytes = read_file(path);
    inputs_.push_back({{"path", path}, {"bytes", bytes.size()}, {"fnv1a64", fnv1a(bytes)}});
    return bytes;
  }

  void emit(const std::string& name, std::string_view contents) {
    write_atomic(cfg_.out_dir / name, contents);
    outputs_.push_back(name);
  }

  void finish(const nlohmann::ordered_json& flags) {
    nlohmann::ordered_json manifest;
    manifest["tool"] = "tcal";
    manifest["version"] = kToolVersion;
    manifest["subcommand"] = cfg_.subcommand;
    manifest["inputs"] = inputs_;
    manifest["flags"] = flags;
    manifest["outputs"] = outputs_;
    write_atomic(cfg_.out_dir / ("manifest_" + cfg_.subcommand + ".json"), manifest.dump(2) + "\n");
  }

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

 private:
  const RunConfig& cfg_;
  std::ostream& out_;
  std::ostream& err_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  std::vector<std::string> outputs_;
};

nlohmann::ordered_json common_flags(const RunConfig& cfg) {
  return {{"loss", cfg.loss},
          {"low_threshold", cfg.low_threshold},
          {"high_threshold", cfg.high_threshold},
          {"log_x", cfg.log_x},
          {"strict", cfg.strict}};
}

struct Calibrated {
  std::vector<BaselineSet> baselines;
  std::vector<CalibratedCurve> curves;  // ordered by (task, method)
};

Calibrated load_calibrated(Run& run, const RunConfig& cfg) {
  const ParseOptions opts{cfg.strict};
  const std::string log_text = run.input(cfg.log_path);
  const std::string base_text = run.input(cfg.baselines_path);
  auto records = with_file(cfg.log_path, [&] { return parse_log(log_text, opts); });
  auto baselines = with_file(cfg.baselines_path, [&] { return parse_baselines(base_text, opts); });

  Calibrated result{baselines, {}};
  for (const auto& curve : aggregate(records)) {
    auto b = std::find_if(baselines.begin(), baselines.end(),
                          [&](const BaselineSet& s) { return s.task == curve.task; });
    if (b == baselines.end()) {
      throw Error(ErrorCode::UnknownTask, "task '" + curve.task + "' has no baselines in " + cfg.baselines_path);
    }
    result.curves.push_back(calibrate_curve(curve, *b));
  }
  return result;
}

std::map<std::string, std::vector<const CalibratedCurve*>> by_task(const std::vector<CalibratedCurve>& curves) {
  std::map<std::string, std::vector<const CalibratedCurve*>> out;
  for (const auto& c : curves) out[c.task].push_back(&c);
  return out;
}

const CalibratedCurve* scratch_of(const std::vector<const CalibratedCurve*>& curves) {
  for (const auto* c : curves) {
    if (c->is_scratch()) return c;
  }
  return nullptr;
}

CciTable compute_ccis(const std::vector<CalibratedCurve>& curves, Run& run) {
  CciTable table;
  for (const auto& [task, group] : by_task(curves)) {
    const auto* scratch = scratch_of(group);
    if (scratch == nullptr) continue;
    for (const auto* c : group) {
      try {
        table[{task, c->method}] = cci(*c, *scratch).cci;
      } catch (const Error& e) {
        run.err() << "warning[" << code_name(e.code()) << "]: CCI skipped for " << c->method << " on " << task
                  << ": " << e.what() << "\n";
      }
    }
  }
  return table;
}

std::string file_safe(std::string_view name) {
  std::string s;
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    s.push_back(ok ? c : '_');
  }
  return s;
}

// ---------------------------------------------------------------------------

int cmd_calibrate(const RunConfig& cfg, Run& run) {
  const auto data = load_calibrated(run, cfg);
  std::string csv = "method,task,n,cr,stderr\n";
  for (const auto& c : data.curves) {
    for (const auto& p : c.points) {
      csv += csv::quote(c.method) + ',' + csv::quote(c.task) + ',' + std::to_string(p.n) + ',' + format_double(p.cr.value) + ',' +
             format_double(p.dispersion.value_or(0.0)) + '\n';
    }
  }
  run.emit("calibrated.csv", csv);
  run.finish(common_flags(cfg));
  return 0;
}

int cmd_blind_guess(const RunConfig& cfg, Run& run) {
  const LossKind loss = parse_loss_kind(cfg.loss);
  run.input(cfg.labels_path);
  const std::string eval_path = cfg.eval_path.empty() ? cfg.labels_path : cfg.eval_path;
  if (!cfg.eval_path.empty()) run.input(cfg.eval_path);

  BlindGuess guess{Prediction::of_class(0), loss};
  std::optional<LabelCollection> train;
  const bool dense_file = has_tclb_magic(cfg.labels_path);
  if (dense_file && loss != LossKind::ZeroOne) {
    TclbFileSource source = with_file(cfg.labels_path, [&] { return TclbFileSource(cfg.labels_path); });
    guess = elementwise_blind_guess(source, loss, cfg.memory_budget);
  } else {
    train.emplace(with_file(cfg.labels_path, [&] { return load_labels(cfg.labels_path); }));
    guess = blind_guess(*train, loss);
  }

  const LabelCollection eval = with_file(eval_path, [&] { return load_labels(eval_path); });
  const Risk risk = empirical_risk(guess.prediction, eval, loss);

  if (guess.prediction.is_class()) {
    run.emit("blind_guess.txt", std::to_string(guess.prediction.class_index()) + "\n");
  } else {
    DenseLabels one{eval.is_class() ? Shape{} : eval.dense().shape,
                    SampleMatrix(1, guess.prediction.array().size())};
    one.values.row(0) = guess.prediction.array().transpose();
    run.emit("blind_guess.tclb", encode_tclb(one, TclbDtype::F64));
  }
  run.emit("blind_risk.csv", "loss,risk\n" + std::string(to_string(loss)) + ',' + format_double(risk.value) + "\n");
  run.out() << "blind-guess " << to_string(loss) << " risk " << format_double(risk.value) << "\n";

  auto flags = common_flags(cfg);
  flags["memory_budget"] = cfg.memory_budget;
  run.finish(flags);
  return 0;
}

int cmd_report(const RunConfig& cfg, Run& run) {
  const auto data = load_calibrated(run, cfg);
  const auto ccis = compute_ccis(data.curves, run);
  bool missing_scratch = false;

  const auto table = render_table(data.curves, data.baselines, ccis);
  run.emit("table.md", table.markdown);
  run.emit("table.csv", table.csv);

  for (const auto& [task, group] : by_task(data.curves)) {
    PlotSpec spec;
    for (const auto* c : group) spec.curves.push_back(*c);
    spec.width = cfg.width;
    spec.height = cfg.height;
    spec.style_seed = cfg.style_seed;
    spec.log_x = cfg.log_x;
    spec.show_bands = !cfg.no_bands;

    spec.kind = PlotKind::CrVsN;
    spec.title = task + ": calibrated risk vs transfer-set size";
    spec.x_label = cfg.log_x ? "transfer-set size n (log scale)" : "transfer-set size n";
    spec.y_label = "calibrated risk";
    run.emit("cr_n_" + file_safe(task) + ".svg", render_cr_n(spec));

    const auto* scratch = scratch_of(group);
    if (scratch == nullptr) {
      missing_scratch = true;
      run.err() << "warning[MISSING_SCRATCH]: task '" << task << "' has no scratch curve; skipping cr-vs-scratch plot\n";
      continue;
    }
    const auto regimes = validate_regimes(*scratch, cfg.low_threshold, cfg.high_threshold);
    for (const auto& w : regimes.warnings) run.err() << "warning[REGIME_COVERAGE]: " << w << "\n";

    spec.kind = PlotKind::CrVsScratch;
    spec.title = task + ": calibrated risk vs scratch";
    spec.x_label = "scratch calibrated risk";
    spec.log_x = false;
    run.emit("cr_scratch_" + file_safe(task) + ".svg", render_cr_scratch(spec));
  }

  auto flags = common_flags(cfg);
  flags["width"] = cfg.width;
  flags["height"] = cfg.height;
  flags["style_seed"] = cfg.style_seed;
  flags["require_scratch"] = cfg.require_scratch;
  flags["bands"] = !cfg.no_bands;
  run.finish(flags);

  if (missing_scratch && cfg.require_scratch) {
    throw Error(ErrorCode::MissingScratch, "a task lacks the scratch control and --require-scratch is set");
  }
  return 0;
}

int cmd_cci(const RunConfig& cfg, Run& run) {
  const auto data = load_calibrated(run, cfg);
  std::string csv = "task,method,cci,x_min,x_max,segments\n";
  for (const auto& [task, group] : by_task(data.curves)) {
    const auto* scratch = scratch_of(group);
    if (scratch == nullptr) {
      run.err() << "warning[MISSING_SCRATCH]: task '" << task << "' has no scratch curve; no CCI\n";
      continue;
    }
    for (const auto* c : group) {
      const auto r = cci(*c, *scratch);
      csv += csv::quote(task) + ',' + csv::quote(c->method) + ',' + format_double(r.cci) + ',' + format_double(r.x_range.first) + ',' +
             format_double(r.x_range.second) + ',' + std::to_string(r.segment_count) + '\n';
      run.out() << task << "\t" << c->method << "\tCCI " << format_fixed(r.cci, 4) << "\n";
    }
  }
  run.emit("cci.csv", csv);
  run.finish(common_flags(cfg));
  return 0;
}

int cmd_validate_regimes(const RunConfig& cfg, Run& run) {
  const auto data = load_calibrated(run, cfg);
  std::string csv = "task,low_end_cr,high_end_cr,warnings\n";
  for (const auto& [task, group] : by_task(data.curves)) {
    const auto* scratch = scratch_of(group);
    if (scratch == nullptr) {
      run.err() << "warning[MISSING_SCRATCH]: task '" << task << "' has no scratch curve\n";
      continue;
    }
    const auto report = validate_regimes(*scratch, cfg.low_threshold, cfg.high_threshold);
    for (const auto& w : report.warnings) run.err() << "warning[REGIME_COVERAGE]: " << w << "\n";
    csv += csv::quote(task) + ',' + format_double(report.low_end_cr.value) + ',' + format_double(report.high_end_cr.value) +
           ',' + std::to_string(report.warnings.size()) + '\n';
    run.out() << task << (report.warnings.empty() ? "\tok\n" : "\tcoverage warnings\n");
  }
  run.emit("regimes.csv", csv);
  run.finish(common_flags(cfg));
  return 0;
}

SimulatedMethod parse_method(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
  if (b == std::string::npos || a == 0) {
    throw Error(ErrorCode::InvalidModel, "method must be NAME:N0:ALPHA, got '" + spec + "'");
  }
  try {
    std::size_t used = 0;
    const std::string n0_text = spec.substr(a + 1, b - a - 1);
    const std::string alpha_text = spec.substr(b + 1);
    const double n0 = std::stod(n0_text, &used);
    if (used != n0_text.size()) throw std::invalid_argument("n0");
    const double alpha = std::stod(alpha_text, &used);
    if (used != alpha_text.size()) throw std::invalid_argument("alpha");
    return {spec.substr(0, a), n0, alpha};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidModel, "method must be NAME:N0:ALPHA, got '" + spec + "'");
  }
}

int cmd_simulate(const RunConfig& cfg, Run& run) {
  SimulationConfig sim;
  sim.task = cfg.task;
  sim.r_blind = {cfg.blind};
  sim.r_max = {cfg.max_risk};
  for (const auto& m : cfg.methods) sim.methods.push_back(parse_method(m));
  sim.regimes = cfg.regimes;
  sim.seeds = cfg.seeds;
  sim.noise_sigma = cfg.noise;
  sim.rng_seed = cfg.seed;
  if (const char* env = std::getenv("TRANSFER_CALIB_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw Error(ErrorCode::InvalidModel, "TRANSFER_CALIB_SEED must be an unsigned integer");
    sim.rng_seed = v;
  }
  if (sim.seeds == 0 || sim.methods.empty() || sim.regimes.empty() || sim.regimes.front() == 0) {
    throw Error(ErrorCode::InvalidModel, "need at least one method, one seed and positive regimes");
  }

  const auto records = simulate_log(sim);
  run.emit("log.csv", serialize_log_csv(records));
  run.emit("baselines.csv", serialize_baselines({{sim.task, sim.r_blind, sim.r_max}}));

  auto flags = common_flags(cfg);
  flags["task"] = sim.task;
  flags["blind"] = cfg.blind;
  flags["max"] = cfg.max_risk;
  flags["methods"] = cfg.methods;
  flags["regimes"] = cfg.regimes;
  flags["seeds"] = cfg.seeds;
  flags["noise"] = cfg.noise;
  flags["rng_seed"] = sim.rng_seed;
  run.finish(flags);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Calibrated evaluation of transfer-learning results", "tcal"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--out", cfg.out_dir, "Output directory");
  app.add_option("--loss", cfg.loss, "Loss kind")->check(CLI::IsMember({"zero-one", "l1", "l2"}));
  app.add_option("--low-threshold", cfg.low_threshold, "Minimum scratch calibrated risk at the smallest n");
  app.add_option("--high-threshold", cfg.high_threshold, "Maximum scratch calibrated risk at the largest n");
  app.add_flag("--log-x,!--linear-x", cfg.log_x, "Log-scale the n axis (default)");
  app.add_flag("--strict,!--no-strict", cfg.strict, "Reject unknown columns/keys (default)");

  auto* calibrate = app.add_subcommand("calibrate", "Write calibrated learning curves");
  auto* blind = app.add_subcommand("blind-guess", "Compute the blind-guess baseline and its risk");
  auto* report = app.add_subcommand("report", "Render plots and tables");
  auto* cci_cmd = app.add_subcommand("cci", "Compute CCI per method");
  auto* regimes = app.add_subcommand("validate-regimes", "Check data-regime coverage");
  auto* simulate = app.add_subcommand("simulate", "Emit a synthetic experiment log");

  for (auto* sub : {calibrate, report, cci_cmd, regimes}) {
    sub->add_option("--log", cfg.log_path, "Experiment log (CSV or JSON lines)")->required();
    sub->add_option("--baselines", cfg.baselines_path, "Baselines CSV")->required();
  }
  blind->add_option("--labels", cfg.labels_path, "Training labels (class CSV or TCLB)")->required();
  blind->add_option("--eval", cfg.eval_path, "Evaluation labels; defaults to --labels");
  blind->add_option("--memory-budget", cfg.memory_budget, "Bytes of label values resident at once");

  report->add_option("--width", cfg.width)->check(CLI::Range(240, 10000));
  report->add_option("--height", cfg.height)->check(CLI::Range(200, 10000));
  report->add_option("--style-seed", cfg.style_seed);
  report->add_flag("--require-scratch", cfg.require_scratch);
  report->add_flag("--no-bands", cfg.no_bands);

  simulate->add_option("--task", cfg.task);
  simulate->add_option("--blind", cfg.blind, "Blind-guess risk");
  simulate->add_option("--max", cfg.max_risk, "Maximal-supervision risk");
  simulate->add_option("--method", cfg.methods, "NAME:N0:ALPHA, repeatable");
  simulate->add_option("--regimes", cfg.regimes)->delimiter(',');
  simulate->add_option("--seeds", cfg.seeds);
  simulate->add_option("--noise", cfg.noise);
  simulate->add_option("--seed", cfg.seed, "Generator seed (TRANSFER_CALIB_SEED overrides)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[USAGE]: " << e.what() << "\n";
    return 1;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    cfg.subcommand = sub->get_name();
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create output directory '" + cfg.out_dir.string() + "'");

    Run run(cfg, out, err);
    if (sub == calibrate) return cmd_calibrate(cfg, run);
    if (sub == blind) return cmd_blind_guess(cfg, run);
    if (sub == report) return cmd_report(cfg, run);
    if (sub == cci_cmd) return cmd_cci(cfg, run);
    if (sub == regimes) return cmd_validate_regimes(cfg, run);
    return cmd_simulate(cfg, run);
  } catch (const Error& e) {
    std::string detail = e.what();
    std::replace(detail.begin(), detail.end(), '\n', ' ');
    err << "error[" << code_name(e.code()) << "]: " << detail << "\n";
    return is_input_error(e.code()) ? 1 : 2;
  }
}

}  // namespace tcal::cli
