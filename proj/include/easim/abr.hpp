#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "easim/errors.hpp"
#include "easim/fecplan.hpp"
#include "easim/quality.hpp"
#include "easim/timeline.hpp"

namespace easim {

/// Session score: mean over chunks of utility minus rebuffer penalty minus
/// quality switching, where utility is the chunk's (effective) bitrate.
struct QoEConfig {
  double rebuffer_penalty_kbps = 4400;  // per second of stall; top-rung equivalent
  double smoothness_weight = 1.0;       // per kbps of utility change between chunks
  bool use_effective_bitrate = true;    // utility = delivered-quality bitrate, not nominal
};

/// What one chunk actually (or predictably) delivered.
struct ChunkOutcome {
  double selected_bitrate_kbps = 0;
  double effective_bitrate_kbps = 0;  // bitrate equivalent of the delivered PSNR
  double rebuffer_s = 0;
  double recovered_frames = 0;  // expected values are fractional
  double sr_frames = 0;
};

/// (sum utility - penalty * sum rebuffer - sum |utility step|) / n_chunks.
/// Throws EmptySession on zero chunks.
double session_qoe(std::span<const ChunkOutcome> chunks, const QoEConfig& cfg);

enum class PolicyKind {
  enhancement_aware,    // models recovery and SR when predicting chunk quality
  recovery_aware_only,
  sr_aware_only,
  plain_qoe_argmax,     // same optimizer, blind to both mechanisms
  buffer_based,         // rung from buffer level thresholds
  rate_based            // highest rung under predicted throughput
};

const char* to_string(PolicyKind k);
PolicyKind policy_kind_from_string(const std::string& s);

struct AbrPolicy {
  PolicyKind kind = PolicyKind::enhancement_aware;
  int lookahead_chunks = 1;  // horizon for the argmax family

  bool recovery_aware() const;
  bool sr_aware() const;
};

/// Everything the rate selector knows at decision time.
struct ClientState {
  double buffer_level_s = 0;  // downloaded-but-unplayed seconds
  double t_prev_s = 0;        // playout time of the previous chunk's last frame
  // First fetch of a session: playout holds until the chunk is complete, so
  // the download wall time is startup delay rather than rebuffering and no
  // frame can miss its deadline.
  bool startup = false;
  std::optional<double> prev_selected_kbps;
  std::optional<double> prev_utility_kbps;  // realized utility of the previous chunk
};

struct Predictions {
  double throughput_kbps = 0;
  double loss_rate = 0;
};

/// Model bundle for chunk scoring: ladder, quality maps, latency costs, QoE
/// weights, and which client mechanisms are actually switched on.
struct ModelSet {
  LadderSpec ladder;
  QualityModel quality;
  EnhancementCost cost;
  QoEConfig qoe;
  const FecPlan* fec_plan = nullptr;  // connatural with enable_fec
  bool enable_recovery = true;
  bool enable_sr = true;
  bool enable_fec = false;
  double packet_payload_bytes = 1200;

  void validate() const;
};

/// Predicted outcome of fetching the next chunk at `candidate_kbps`.
struct ChunkEstimate {
  ChunkOutcome outcome;
  double utility_kbps = 0;       // effective or nominal per QoEConfig
  double qoe_contribution = 0;   // utility - penalty * rebuffer (no smoothness)
  double fec_ratio = 0;          // redundancy applied, 0 when FEC is off
  double download_s = 0;         // predicted wall time to fetch the chunk
};

/// Forward-model one chunk at a candidate rung: plan FEC from the loss
/// prediction, lay out frame timing, classify frames, and price recovery/SR
/// exactly as far as the policy is aware of them.
ChunkEstimate estimate_chunk_qoe(double candidate_kbps, const ClientState& state,
                                 const Predictions& pred, const ModelSet& models,
                                 const AbrPolicy& policy);

struct ScoredCandidate {
  double bitrate_kbps = 0;
  double score = 0;  // estimated QoE incl. smoothness step and lookahead
};

/// Pick the rung maximizing estimated QoE including the smoothness step
/// against the previous chunk (ties break to the lower bitrate). The
/// buffer_based / rate_based baselines use their own rules and ignore the
/// chunk estimator. `scores`, when given, receives the per-rung scores the
/// argmax ran over (left empty for the threshold baselines).
double select_bitrate(const ClientState& state, const Predictions& pred, const ModelSet& models,
                      const AbrPolicy& policy, std::vector<ScoredCandidate>* scores = nullptr);

}  // namespace easim
