#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "easim/abr.hpp"
#include "easim/fec.hpp"
#include "easim/fecplan.hpp"
#include "easim/traces.hpp"

namespace easim {

/// Full configuration of one simulated playback session.
struct SimConfig {
  LadderSpec ladder = LadderSpec::default_ladder();
  QualityModel quality = QualityModel::default_model();
  EnhancementCost cost = EnhancementCost::default_cost();
  QoEConfig qoe;
  AbrPolicy policy;
  LossModel loss_model = LossModel::bursty(0.01);  // re-aimed per trace sample
  std::optional<FecPlan> fec_plan;

  bool enable_recovery = true;
  bool enable_sr = true;
  bool enable_fec = false;

  PredictorKind predictor = PredictorKind::ewma;
  double ewma_alpha = 0.3;
  double hw_level_alpha = 0.5;
  double hw_trend_beta = 0.1;

  double packet_payload_bytes = 1200;
  int max_chunks = 0;                     // 0: play until the trace ends
  std::optional<double> forced_fec_ratio; // pin the ratio (plan building sweeps this)
  std::optional<double> loss_override;    // ignore the trace's loss column
  std::string scheme_name;                // label on reports; defaults to the policy name
  bool record_frames = true;
  bool record_decisions = true;
  std::uint64_t seed = 1;

  void validate() const;
  ModelSet model_set() const;  // view for the rate selector (fec_plan must outlive it)
};

/// One rate decision, as logged.
struct DecisionRecord {
  int chunk = 0;  // 1-based
  std::vector<ScoredCandidate> candidates;  // empty for the threshold baselines
  double chosen_kbps = 0;
  double predicted_throughput_kbps = 0;
  double predicted_loss = 0;
  double fec_ratio = 0;
  double buffer_level_s = 0;
};

/// One JSON object, no trailing newline; the decision log is one line each.
std::string decision_to_json_line(const DecisionRecord& d);

struct FrameRecord {
  int chunk = 0;       // 1-based
  int index = 0;       // 1-based within the chunk
  FrameKind kind = FrameKind::received_no_sr;
  double stall_s = 0;
  double psnr_db = 0;
};

struct SessionStats {
  double mean_selected_kbps = 0;
  double mean_effective_kbps = 0;
  double mean_psnr_db = 0;
  double total_rebuffer_s = 0;
  double startup_delay_s = 0;
  double recovered_fraction = 0;  // of played frames
  double sr_fraction = 0;
  double played_s = 0;
};

struct SessionReport {
  std::string trace_id;
  NetworkKind network = NetworkKind::synthetic;
  std::string scheme;
  std::vector<ChunkOutcome> per_chunk;
  std::vector<FrameRecord> per_frame;      // when record_frames
  std::vector<DecisionRecord> decisions;   // when record_decisions
  double qoe = 0;
  SessionStats stats;
  bool truncated = false;  // trace ran out mid-session

  std::string to_json_text() const;
};

/// Deterministic discrete-event playback of one trace under one config:
/// sequential chunk downloads against the trace's piecewise throughput,
/// packet loss from the seeded channel, and a frame-by-frame playout clock
/// with recovery / SR / reuse exactly as enabled. Identical inputs give an
/// identical report.
SessionReport run_session(const NetworkTrace& trace, const SimConfig& cfg);

/// A named client configuration for side-by-side comparison runs.
struct SchemeSpec {
  std::string name;
  AbrPolicy policy;
  bool enable_recovery = true;
  bool enable_sr = true;
  bool enable_fec = false;

  static std::vector<SchemeSpec> default_suite();
};

struct MatrixRow {
  NetworkKind network = NetworkKind::synthetic;
  std::string scheme;
  std::string trace_id;
  double qoe = 0;
  double mean_bitrate_kbps = 0;
  double rebuffer_s = 0;
  double recovered_frac = 0;
};

/// Mean per (network, scheme) cell plus relative QoE lift over the first
/// scheme in the suite.
struct MatrixCell {
  NetworkKind network = NetworkKind::synthetic;
  std::string scheme;
  int sessions = 0;
  double qoe = 0;
  double mean_bitrate_kbps = 0;
  double rebuffer_s = 0;
  double recovered_frac = 0;
  double qoe_lift_vs_baseline = 0;
};

struct MatrixResult {
  std::vector<MatrixRow> rows;    // sorted by (network, scheme, trace)
  std::vector<MatrixCell> cells;  // sorted by (network, scheme)
  std::string baseline_scheme;

  std::string rows_csv() const;   // network,scheme,trace_id,qoe,mean_bitrate,rebuffer_s,recovered_frac
  std::string cells_csv() const;
};

/// Run every (trace, scheme) pair. Per-session seeds derive from cfg.seed,
/// the trace id and the scheme name, so results do not depend on `jobs` or
/// scheduling order. `reports`, when given, receives every SessionReport in
/// the same deterministic order as `rows` (frame/decision recording then
/// follows the base config; otherwise both are skipped to save memory).
MatrixResult run_matrix(const std::vector<NetworkTrace>& traces, const SimConfig& base,
                        const std::vector<SchemeSpec>& schemes, int jobs = 1,
                        std::vector<SessionReport>* reports = nullptr);

struct PlanBuildOptions {
  std::vector<double> loss_grid = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.10};
  std::vector<double> ratio_grid = {0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  int jobs = 1;
};

/// Offline sweep: for each loss grid point, simulate every training trace at
/// every candidate ratio (loss pinned to the grid value) and keep the ratio
/// with the best mean QoE; ties break to the lower ratio.
FecPlan build_fec_plan(const std::vector<NetworkTrace>& training, const SimConfig& base,
                       const PlanBuildOptions& opts);

}  // namespace easim
