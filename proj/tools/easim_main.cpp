// Command-line front end: validate/synthesize traces, sweep FEC curves, build
// redundancy plans, run session matrices, and emit figure-ready CSVs.
//
// Exit codes: 0 success, 1 domain error (bad input, missing file, failed
// simulation), 2 usage error (unknown flag/subcommand).

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "easim/abr.hpp"
#include "easim/errors.hpp"
#include "easim/fec.hpp"
#include "easim/fecplan.hpp"
#include "easim/quality.hpp"
#include "easim/simulator.hpp"
#include "easim/synthetic.hpp"
#include "easim/traces.hpp"
#include "../src/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace easim;

namespace {

constexpr const char* kOutDirEnv = "EASIM_OUT_DIR";

int default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Flag > environment > fallback.
std::string resolve_out_dir(const std::string& flag_value, const std::string& fallback) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return fallback;
}

/// Write via a temp file + rename so readers never see a half-written file.
void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Refuse to clobber existing outputs unless --force; checked for the whole
/// batch up front so a failing run never leaves a partial mix of old and new.
void check_overwrites(const std::vector<fs::path>& targets, bool force) {
  if (force) return;
  for (const auto& p : targets)
    if (fs::exists(p)) throw Error(p.string() + " exists (pass --force to overwrite)");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Scheme catalog: the comparison suite plus the two threshold baselines.

std::vector<SchemeSpec> known_schemes() {
  std::vector<SchemeSpec> all = SchemeSpec::default_suite();
  AbrPolicy rate;
  rate.kind = PolicyKind::rate_based;
  AbrPolicy buffer;
  buffer.kind = PolicyKind::buffer_based;
  all.push_back({"rate_based", rate, false, false, false});
  all.push_back({"buffer_based", buffer, false, false, false});
  return all;
}

SchemeSpec scheme_by_name(const std::string& name) {
  for (const auto& s : known_schemes())
    if (s.name == name) return s;
  std::string names;
  for (const auto& s : known_schemes()) names += (names.empty() ? "" : ", ") + s.name;
  throw ConfigError("unknown scheme \"" + name + "\" (known: " + names + ")");
}

// ---------------------------------------------------------------------------
// Experiment config: one strict JSON file driving `run`.

struct ExperimentConfig {
  std::string trace_dir;       // empty: use the synthetic suite
  std::string quality_model;   // path; empty: built-in default
  std::string fec_plan;        // path; empty: none (FEC schemes unavailable)
  std::string output_dir;      // may still be overridden by flag/env
  std::vector<std::string> schemes;  // empty: default suite
  int synth_per_kind = 3;
  double synth_duration_s = 120;
  std::optional<double> synth_loss;
  SimConfig sim;
};

std::string get_string(const json& obj, const char* key, const std::string& context) {
  if (!obj.at(key).is_string()) throw ParseError(context + ": \"" + key + "\" must be a string");
  return obj.at(key).get<std::string>();
}

bool get_bool(const json& obj, const char* key, const std::string& context) {
  if (!obj.at(key).is_boolean()) throw ParseError(context + ": \"" + key + "\" must be a boolean");
  return obj.at(key).get<bool>();
}

LossModel parse_loss_model(const json& j, const std::string& context) {
  detail::require_keys(j, {"kind", "loss_rate", "mean_burst_len", "loss_in_bad"}, context);
  const std::string kind = j.contains("kind") ? get_string(j, "kind", context) : "bursty";
  const double rate = j.contains("loss_rate") ? detail::get_number(j, "loss_rate", context) : 0.01;
  if (kind == "bernoulli") {
    for (const char* k : {"mean_burst_len", "loss_in_bad"})
      if (j.contains(k))
        throw ParseError(context + ": \"" + k + "\" only applies to the bursty model");
    return LossModel::bernoulli(rate);
  }
  if (kind == "bursty") {
    const double burst =
        j.contains("mean_burst_len") ? detail::get_number(j, "mean_burst_len", context) : 4.0;
    const double in_bad =
        j.contains("loss_in_bad") ? detail::get_number(j, "loss_in_bad", context) : 0.25;
    return LossModel::bursty(rate, burst, in_bad);
  }
  throw ParseError(context + ": loss model kind must be \"bernoulli\" or \"bursty\"");
}

ExperimentConfig parse_experiment_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  const std::string ctx = "config " + path.filename().string();
  detail::require_keys(
      j,
      {"trace_dir", "quality_model", "fec_plan", "output_dir", "schemes", "seed", "synthetic",
       "qoe", "cost", "predictor", "ewma_alpha", "hw_level_alpha", "hw_trend_beta",
       "lookahead_chunks", "max_chunks", "packet_payload_bytes", "loss_model", "loss_override",
       "record_frames", "record_decisions"},
      ctx);

  ExperimentConfig cfg;
  cfg.sim.record_frames = false;   // opt in: per-frame logs are large
  cfg.sim.record_decisions = true;

  if (j.contains("trace_dir")) cfg.trace_dir = get_string(j, "trace_dir", ctx);
  if (j.contains("quality_model")) cfg.quality_model = get_string(j, "quality_model", ctx);
  if (j.contains("fec_plan")) cfg.fec_plan = get_string(j, "fec_plan", ctx);
  if (j.contains("output_dir")) cfg.output_dir = get_string(j, "output_dir", ctx);
  if (j.contains("schemes")) {
    if (!j.at("schemes").is_array()) throw ParseError(ctx + ": \"schemes\" must be an array");
    for (const auto& s : j.at("schemes")) {
      if (!s.is_string()) throw ParseError(ctx + ": scheme names must be strings");
      cfg.schemes.push_back(s.get<std::string>());
    }
    if (cfg.schemes.empty()) throw ParseError(ctx + ": \"schemes\" must not be empty");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      throw ParseError(ctx + ": \"seed\" must be an integer");
    cfg.sim.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    detail::require_keys(s, {"per_kind", "duration_s", "loss"}, ctx + ".synthetic");
    if (s.contains("per_kind"))
      cfg.synth_per_kind = static_cast<int>(detail::get_number(s, "per_kind", ctx));
    if (s.contains("duration_s")) cfg.synth_duration_s = detail::get_number(s, "duration_s", ctx);
    if (s.contains("loss")) cfg.synth_loss = detail::get_number(s, "loss", ctx);
  }
  if (j.contains("qoe")) {
    const json& q = j.at("qoe");
    detail::require_keys(q, {"rebuffer_penalty_kbps", "smoothness_weight", "use_effective_bitrate"},
                         ctx + ".qoe");
    if (q.contains("rebuffer_penalty_kbps"))
      cfg.sim.qoe.rebuffer_penalty_kbps = detail::get_number(q, "rebuffer_penalty_kbps", ctx);
    if (q.contains("smoothness_weight"))
      cfg.sim.qoe.smoothness_weight = detail::get_number(q, "smoothness_weight", ctx);
    if (q.contains("use_effective_bitrate"))
      cfg.sim.qoe.use_effective_bitrate = get_bool(q, "use_effective_bitrate", ctx);
  }
  if (j.contains("cost")) {
    const json& c = j.at("cost");
    detail::require_keys(c, {"t_sr_s", "t_rc_s", "decode_latency_in_sr_gate"}, ctx + ".cost");
    if (c.contains("t_sr_s")) cfg.sim.cost.t_sr_s = detail::get_number(c, "t_sr_s", ctx);
    if (c.contains("t_rc_s")) cfg.sim.cost.t_rc_s = detail::get_number(c, "t_rc_s", ctx);
    if (c.contains("decode_latency_in_sr_gate"))
      cfg.sim.cost.decode_latency_in_sr_gate = get_bool(c, "decode_latency_in_sr_gate", ctx);
  }
  if (j.contains("predictor")) {
    const std::string p = get_string(j, "predictor", ctx);
    if (p == "ewma") cfg.sim.predictor = PredictorKind::ewma;
    else if (p == "holt_winters") cfg.sim.predictor = PredictorKind::holt_winters;
    else throw ParseError(ctx + ": predictor must be \"ewma\" or \"holt_winters\"");
  }
  if (j.contains("ewma_alpha")) cfg.sim.ewma_alpha = detail::get_number(j, "ewma_alpha", ctx);
  if (j.contains("hw_level_alpha"))
    cfg.sim.hw_level_alpha = detail::get_number(j, "hw_level_alpha", ctx);
  if (j.contains("hw_trend_beta"))
    cfg.sim.hw_trend_beta = detail::get_number(j, "hw_trend_beta", ctx);
  if (j.contains("lookahead_chunks"))
    cfg.sim.policy.lookahead_chunks = static_cast<int>(detail::get_number(j, "lookahead_chunks", ctx));
  if (j.contains("max_chunks"))
    cfg.sim.max_chunks = static_cast<int>(detail::get_number(j, "max_chunks", ctx));
  if (j.contains("packet_payload_bytes"))
    cfg.sim.packet_payload_bytes = detail::get_number(j, "packet_payload_bytes", ctx);
  if (j.contains("loss_model")) cfg.sim.loss_model = parse_loss_model(j.at("loss_model"), ctx);
  if (j.contains("loss_override")) cfg.sim.loss_override = detail::get_number(j, "loss_override", ctx);
  if (j.contains("record_frames")) cfg.sim.record_frames = get_bool(j, "record_frames", ctx);
  if (j.contains("record_decisions")) cfg.sim.record_decisions = get_bool(j, "record_decisions", ctx);
  return cfg;
}

// ---------------------------------------------------------------------------
// trace validate / trace synth

int cmd_trace_validate(const std::vector<std::string>& paths) {
  bool failed = false;
  std::vector<NetworkTrace> traces;
  for (const auto& p : paths) {
    try {
      if (fs::is_directory(p)) {
        for (auto& t : load_trace_dir(p)) traces.push_back(std::move(t));
      } else {
        traces.push_back(load_trace(p));
      }
    } catch (const std::exception& e) {
      std::cerr << p << ": " << e.what() << "\n";
      failed = true;
    }
  }
  for (const auto& t : traces)
    std::cout << t.id << ": ok (" << to_string(t.kind) << ", " << t.samples.size() << " samples, "
              << detail::fmt(t.duration_s(), 1) << " s, mean "
              << detail::fmt(t.mean_throughput_kbps(), 1) << " kbps, loss "
              << detail::fmt(t.mean_loss_rate(), 4) << ")\n";
  return failed ? 1 : 0;
}

struct SynthArgs {
  std::string out_dir;
  int per_kind = 3;
  double duration_s = 120;
  std::uint64_t seed = 1;
  std::optional<double> loss;
  bool force = false;
};

int cmd_trace_synth(const SynthArgs& args) {
  const auto traces = synthetic_suite(args.per_kind, args.duration_s, args.seed, args.loss);
  std::vector<fs::path> targets;
  for (const auto& t : traces) targets.push_back(fs::path(args.out_dir) / (t.id + ".csv"));
  check_overwrites(targets, args.force);
  for (std::size_t i = 0; i < traces.size(); ++i)
    write_atomic(targets[i], trace_to_csv(traces[i]));
  std::cout << "wrote " << traces.size() << " traces to " << args.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fec sweep

struct SweepArgs {
  std::vector<double> losses;
  int packets = 24;
  std::vector<double> grid = {0.0,  0.05, 0.10, 0.15, 0.20, 0.25,
                              0.30, 0.35, 0.40, 0.45, 0.50};
  std::string model = "bursty";
  double burst_len = 4.0;
  double loss_in_bad = 0.25;
  std::string method = "monte_carlo";
  long trials = 100000;
  std::uint64_t seed = 1;
  std::string out;  // empty: stdout
  bool force = false;
};

int cmd_fec_sweep(SweepArgs args) {
  if (args.losses.empty()) throw ConfigError("fec sweep: at least one --loss required");
  std::sort(args.losses.begin(), args.losses.end());
  std::sort(args.grid.begin(), args.grid.end());
  const LossMethod method = [&] {
    if (args.method == "analytic") return LossMethod::analytic;
    if (args.method == "monte_carlo") return LossMethod::monte_carlo;
    throw ConfigError("fec sweep: method must be analytic or monte_carlo");
  }();

  const bool multi = args.losses.size() > 1;
  std::string csv = multi ? "loss,ratio,frame_loss_prob\n" : "ratio,frame_loss_prob\n";
  for (double loss : args.losses) {
    const LossModel model = args.model == "bernoulli"
                                ? LossModel::bernoulli(loss)
                                : LossModel::bursty(loss, args.burst_len, args.loss_in_bad);
    if (args.model != "bernoulli" && args.model != "bursty")
      throw ConfigError("fec sweep: model must be bernoulli or bursty");
    for (double ratio : args.grid) {
      const double p = frame_loss_probability(
          args.packets, ratio, model, method, args.trials,
          detail::mix_seed(args.seed, "sweep/" + detail::fmt(loss, 6) + "/" + detail::fmt(ratio, 6)));
      if (multi) csv += detail::fmt(loss, 6) + ",";
      csv += detail::fmt(ratio, 6) + "," + detail::fmt(p, 9) + "\n";
    }
  }
  if (args.out.empty()) {
    std::cout << csv;
  } else {
    check_overwrites({args.out}, args.force);
    write_atomic(args.out, csv);
    std::cout << "wrote " << args.out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// fecplan build

struct PlanArgs {
  std::string trace_dir;
  std::string out;
  std::string policy = "enhancement_aware";
  bool no_recovery = false;
  bool no_sr = false;
  std::string quality;  // optional model path
  std::vector<double> loss_grid;
  std::vector<double> ratio_grid;
  int jobs = default_jobs();
  std::uint64_t seed = 1;
  int max_chunks = 0;
  bool force = false;
};

int cmd_fecplan_build(const PlanArgs& args) {
  const auto traces = load_trace_dir(args.trace_dir);
  SimConfig base;
  base.policy.kind = policy_kind_from_string(args.policy);
  base.enable_recovery = !args.no_recovery;
  base.enable_sr = !args.no_sr;
  base.seed = args.seed;
  base.max_chunks = args.max_chunks;
  base.record_frames = false;
  base.record_decisions = false;
  if (!args.quality.empty()) base.quality = QualityModel::load(args.quality);

  PlanBuildOptions opts;
  if (!args.loss_grid.empty()) opts.loss_grid = args.loss_grid;
  if (!args.ratio_grid.empty()) opts.ratio_grid = args.ratio_grid;
  opts.jobs = args.jobs;

  const FecPlan plan = build_fec_plan(traces, base, opts);
  check_overwrites({args.out}, args.force);
  write_atomic(args.out, plan.to_json_text());
  std::cout << "wrote plan (" << plan.loss_grid.size() << " loss points, scheme " << plan.scheme
            << ") to " << args.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
  std::string config_path;
  std::string out_dir;  // flag; may defer to config/env
  std::optional<std::uint64_t> seed;
  int jobs = default_jobs();
  bool force = false;
};

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
                              ? c
                              : '_';
  return out;
}

int cmd_run(const RunArgs& args) {
  ExperimentConfig cfg = parse_experiment_config(args.config_path);
  if (args.seed) cfg.sim.seed = *args.seed;
  const std::string out_dir =
      resolve_out_dir(!args.out_dir.empty() ? args.out_dir : cfg.output_dir, "easim_out");

  if (!cfg.quality_model.empty()) cfg.sim.quality = QualityModel::load(cfg.quality_model);
  if (!cfg.fec_plan.empty()) cfg.sim.fec_plan = FecPlan::load(cfg.fec_plan);

  // Resolve the scheme list; FEC schemes need a plan to look ratios up in.
  std::vector<SchemeSpec> schemes;
  if (cfg.schemes.empty()) {
    for (const auto& s : SchemeSpec::default_suite())
      if (!s.enable_fec || cfg.sim.fec_plan) schemes.push_back(s);
  } else {
    for (const auto& name : cfg.schemes) {
      SchemeSpec s = scheme_by_name(name);
      if (s.enable_fec && !cfg.sim.fec_plan)
        throw ConfigError("scheme \"" + name + "\" needs \"fec_plan\" in the config");
      schemes.push_back(std::move(s));
    }
  }

  const std::vector<NetworkTrace> traces =
      cfg.trace_dir.empty()
          ? synthetic_suite(cfg.synth_per_kind, cfg.synth_duration_s, cfg.sim.seed, cfg.synth_loss)
          : load_trace_dir(cfg.trace_dir);

  std::vector<SessionReport> reports;
  const MatrixResult matrix = run_matrix(traces, cfg.sim, schemes, args.jobs, &reports);

  // Stage every output, then check for clobbering, then write.
  const fs::path out(out_dir);
  std::vector<std::pair<fs::path, std::string>> files;
  files.emplace_back(out / "matrix_rows.csv", matrix.rows_csv());
  files.emplace_back(out / "matrix_cells.csv", matrix.cells_csv());
  for (const auto& rep : reports) {
    const std::string stem = sanitize(rep.trace_id) + "__" + sanitize(rep.scheme);
    files.emplace_back(out / "sessions" / (stem + ".json"), rep.to_json_text());
    if (!rep.decisions.empty()) {
      std::string lines;
      for (const auto& d : rep.decisions) lines += decision_to_json_line(d) + "\n";
      files.emplace_back(out / "decisions" / (stem + ".jsonl"), std::move(lines));
    }
  }

  // Summary block: per-scheme means over all sessions, lift vs the baseline.
  std::map<std::string, std::pair<double, int>> by_scheme;
  for (const auto& row : matrix.rows) {
    by_scheme[row.scheme].first += row.qoe;
    by_scheme[row.scheme].second += 1;
  }
  auto scheme_mean = [&](const std::string& name) {
    const auto& acc = by_scheme.at(name);
    return acc.first / acc.second;
  };
  const double base_qoe = scheme_mean(matrix.baseline_scheme);
  std::string summary;
  summary += "run: " + std::to_string(traces.size()) + " traces x " +
             std::to_string(schemes.size()) + " schemes = " + std::to_string(matrix.rows.size()) +
             " sessions (seed " + std::to_string(cfg.sim.seed) + ")\n";
  summary += "scheme, mean_qoe, lift_vs_" + matrix.baseline_scheme + "\n";
  for (const auto& s : schemes) {
    const double q = scheme_mean(s.name);
    const double lift = base_qoe == 0 ? 0 : (q - base_qoe) / std::abs(base_qoe);
    summary += s.name + ", " + detail::fmt(q, 2) + ", " + detail::fmt(100 * lift, 2) + "%\n";
  }
  files.emplace_back(out / "summary.txt", summary);

  std::vector<fs::path> targets;
  for (const auto& [p, _] : files) targets.push_back(p);
  check_overwrites(targets, args.force);
  for (const auto& [p, content] : files) write_atomic(p, content);

  std::cout << summary << "wrote " << files.size() << " files to " << out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// figures

struct FigureArgs {
  std::string kind;
  std::string run_dir;  // flag; may defer to env
  std::string out;      // empty: <run_dir>/figures/<kind>.csv
  bool force = false;
};

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  if (!fs::exists(path))
    throw MissingPrereq(path.string() + " not found; run the producing command first");
  std::ifstream in(path);
  if (!in) throw MissingPrereq("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  if (rows.size() < 2) throw MissingPrereq(path.string() + " has no data rows");
  return rows;
}

std::size_t column_of(const std::vector<std::string>& header, const std::string& name,
                      const fs::path& where) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ParseError(where.string() + ": missing column \"" + name + "\"");
}

int cmd_figures(const FigureArgs& args) {
  const fs::path run_dir(resolve_out_dir(args.run_dir, "easim_out"));
  std::string csv;

  if (args.kind == "qoe_bars" || args.kind == "recovered_frac") {
    const fs::path src = run_dir / "matrix_cells.csv";
    const auto rows = read_csv(src);
    const std::string value_col = args.kind == "qoe_bars" ? "qoe" : "recovered_frac";
    const std::size_t net = column_of(rows[0], "network", src);
    const std::size_t scheme = column_of(rows[0], "scheme", src);
    const std::size_t val = column_of(rows[0], value_col, src);
    csv = "network,scheme," + value_col + "\n";
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (args.kind == "recovered_frac") {
        const double v = std::stod(rows[i][val]);
        if (!(v >= 0 && v <= 1))
          throw ValidationError(src.string() + ": recovered_frac outside [0, 1]");
      }
      csv += rows[i][net] + "," + rows[i][scheme] + "," + rows[i][val] + "\n";
    }
  } else if (args.kind == "fec_sweep") {
    const fs::path src = run_dir / "fec_sweep.csv";
    const auto rows = read_csv(src);
    if (rows[0].size() == 2) {
      const std::size_t ratio = column_of(rows[0], "ratio", src);
      const std::size_t prob = column_of(rows[0], "frame_loss_prob", src);
      csv = "ratio,frame_loss_prob\n";
      for (std::size_t i = 1; i < rows.size(); ++i)
        csv += rows[i][ratio] + "," + rows[i][prob] + "\n";
    } else {
      const std::size_t loss = column_of(rows[0], "loss", src);
      const std::size_t ratio = column_of(rows[0], "ratio", src);
      const std::size_t prob = column_of(rows[0], "frame_loss_prob", src);
      std::vector<std::vector<std::string>> data(rows.begin() + 1, rows.end());
      std::sort(data.begin(), data.end(),
                [&](const std::vector<std::string>& a, const std::vector<std::string>& b) {
                  const double la = std::stod(a[loss]), lb = std::stod(b[loss]);
                  if (la != lb) return la < lb;
                  return std::stod(a[ratio]) < std::stod(b[ratio]);
                });
      csv = "loss,ratio,frame_loss_prob\n";
      for (const auto& r : data) csv += r[loss] + "," + r[ratio] + "," + r[prob] + "\n";
    }
  } else {
    throw ConfigError("figures: kind must be fec_sweep, qoe_bars, or recovered_frac");
  }

  const fs::path out =
      args.out.empty() ? run_dir / "figures" / (args.kind + ".csv") : fs::path(args.out);
  check_overwrites({out}, args.force);
  write_atomic(out, csv);
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace-driven simulator for enhancement-aware adaptive streaming"};
  app.require_subcommand(1);
  int rc = 0;

  // trace ------------------------------------------------------------------
  auto* trace = app.add_subcommand("trace", "inspect or generate network traces");
  trace->require_subcommand(1);

  auto* validate = trace->add_subcommand("validate", "parse and sanity-check traces");
  auto validate_paths = std::make_shared<std::vector<std::string>>();
  validate->add_option("paths", *validate_paths, "trace files or directories")->required();
  validate->callback([validate_paths, &rc] { rc = cmd_trace_validate(*validate_paths); });

  auto* synth = trace->add_subcommand("synth", "write a synthetic trace suite");
  auto synth_args = std::make_shared<SynthArgs>();
  synth->add_option("--out-dir", synth_args->out_dir, "directory for the CSVs")->required();
  synth->add_option("--per-kind", synth_args->per_kind, "traces per network kind")
      ->default_val(3)
      ->check(CLI::PositiveNumber);
  synth->add_option("--duration", synth_args->duration_s, "trace length in seconds")
      ->default_val(120.0);
  synth->add_option("--seed", synth_args->seed, "master seed")->default_val(1);
  double synth_loss = -1;
  synth->add_option("--loss", synth_loss, "override the per-kind mean loss rate");
  synth->add_flag("--force", synth_args->force, "overwrite existing files");
  synth->callback([synth_args, &synth_loss, &rc] {
    if (synth_loss >= 0) synth_args->loss = synth_loss;
    rc = cmd_trace_synth(*synth_args);
  });

  // fec sweep ----------------------------------------------------------------
  auto* fec = app.add_subcommand("fec", "erasure-coding loss curves");
  fec->require_subcommand(1);
  auto* sweep = fec->add_subcommand("sweep", "frame-loss probability across redundancy ratios");
  auto sweep_args = std::make_shared<SweepArgs>();
  sweep->add_option("--loss", sweep_args->losses, "packet loss rate(s)")->required();
  sweep->add_option("--packets", sweep_args->packets, "data packets per frame")->default_val(24);
  sweep->add_option("--grid", sweep_args->grid, "redundancy ratios to sweep");
  sweep->add_option("--model", sweep_args->model, "bernoulli or bursty")->default_val("bursty");
  sweep->add_option("--burst-len", sweep_args->burst_len, "bursty: mean burst length")
      ->default_val(4.0);
  sweep->add_option("--loss-in-bad", sweep_args->loss_in_bad, "bursty: drop rate in the bad state")
      ->default_val(0.25);
  sweep->add_option("--method", sweep_args->method, "analytic or monte_carlo")
      ->default_val("monte_carlo");
  sweep->add_option("--trials", sweep_args->trials, "Monte-Carlo trials")->default_val(100000);
  sweep->add_option("--seed", sweep_args->seed, "RNG seed")->default_val(1);
  sweep->add_option("-o,--out", sweep_args->out, "output CSV (default: stdout)");
  sweep->add_flag("--force", sweep_args->force, "overwrite an existing output file");
  sweep->callback([sweep_args, &rc] { rc = cmd_fec_sweep(*sweep_args); });

  // fecplan build ------------------------------------------------------------
  auto* fecplan = app.add_subcommand("fecplan", "loss-to-redundancy lookup tables");
  fecplan->require_subcommand(1);
  auto* build = fecplan->add_subcommand("build", "sweep simulated QoE and keep the argmax ratio");
  auto plan_args = std::make_shared<PlanArgs>();
  build->add_option("--traces", plan_args->trace_dir, "training trace directory")->required();
  build->add_option("--out", plan_args->out, "plan JSON path")->required();
  build->add_option("--policy", plan_args->policy, "rate-selection policy the plan is built for")
      ->default_val("enhancement_aware");
  build->add_flag("--no-recovery", plan_args->no_recovery, "build for a client without recovery");
  build->add_flag("--no-sr", plan_args->no_sr, "build for a client without upscaling");
  build->add_option("--quality", plan_args->quality, "quality model JSON (default: built-in)");
  build->add_option("--loss-grid", plan_args->loss_grid, "loss rates to tabulate");
  build->add_option("--ratio-grid", plan_args->ratio_grid, "candidate redundancy ratios");
  build->add_option("--jobs", plan_args->jobs, "parallel workers")->default_val(default_jobs());
  build->add_option("--seed", plan_args->seed, "master seed")->default_val(1);
  build->add_option("--max-chunks", plan_args->max_chunks, "cap chunks per training session")
      ->default_val(0);
  build->add_flag("--force", plan_args->force, "overwrite an existing plan");
  build->callback([plan_args, &rc] { rc = cmd_fecplan_build(*plan_args); });

  // run ------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run the scheme x trace matrix from a config file");
  auto run_args = std::make_shared<RunArgs>();
  run->add_option("config", run_args->config_path, "experiment config JSON")->required();
  run->add_option("--out-dir", run_args->out_dir,
                  "output directory (default: config, then $" + std::string(kOutDirEnv) +
                      ", then ./easim_out)");
  std::uint64_t run_seed = 0;
  auto* seed_opt = run->add_option("--seed", run_seed, "override the config seed");
  run->add_option("--jobs", run_args->jobs, "parallel workers")->default_val(default_jobs());
  run->add_flag("--force", run_args->force, "overwrite existing outputs");
  run->callback([run_args, seed_opt, &run_seed, &rc] {
    if (seed_opt->count() > 0) run_args->seed = run_seed;
    rc = cmd_run(*run_args);
  });

  // figures ------------------------------------------------------------------
  auto* figures = app.add_subcommand("figures", "re-emit run outputs as figure-ready CSVs");
  auto fig_args = std::make_shared<FigureArgs>();
  figures->add_option("kind", fig_args->kind, "fec_sweep, qoe_bars, or recovered_frac")->required();
  figures->add_option("--run-dir", fig_args->run_dir,
                      "directory holding run outputs (default: $" + std::string(kOutDirEnv) +
                          ", then ./easim_out)");
  figures->add_option("-o,--out", fig_args->out, "output CSV (default: <run-dir>/figures/<kind>.csv)");
  figures->add_flag("--force", fig_args->force, "overwrite an existing output file");
  figures->callback([fig_args, &rc] { rc = cmd_figures(*fig_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse diagnostic
    return code == 0 ? 0 : 2;      // non-help parse problems are usage errors
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
