#include "easim/abr.hpp"

#include <algorithm>
#include <cmath>

#include "easim/fec.hpp"
#include "util.hpp"

namespace easim {

double session_qoe(std::span<const ChunkOutcome> chunks, const QoEConfig& cfg) {
  if (chunks.empty()) throw EmptySession("session_qoe: no chunks");
  if (!(cfg.rebuffer_penalty_kbps > 0))
    throw ValidationError("qoe: rebuffer penalty must be positive");
  if (!(cfg.smoothness_weight >= 0))
    throw ValidationError("qoe: smoothness weight must be non-negative");
  auto utility = [&](const ChunkOutcome& c) {
    return cfg.use_effective_bitrate ? c.effective_bitrate_kbps : c.selected_bitrate_kbps;
  };
  double total = 0, stalls = 0, steps = 0;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    total += utility(chunks[i]);
    stalls += chunks[i].rebuffer_s;
    if (i > 0) steps += std::abs(utility(chunks[i]) - utility(chunks[i - 1]));
  }
  return (total - cfg.rebuffer_penalty_kbps * stalls - cfg.smoothness_weight * steps) /
         static_cast<double>(chunks.size());
}

const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::enhancement_aware: return "enhancement_aware";
    case PolicyKind::recovery_aware_only: return "recovery_aware_only";
    case PolicyKind::sr_aware_only: return "sr_aware_only";
    case PolicyKind::plain_qoe_argmax: return "plain_qoe_argmax";
    case PolicyKind::buffer_based: return "buffer_based";
    case PolicyKind::rate_based: return "rate_based";
  }
  throw ValidationError("unknown policy kind");
}

PolicyKind policy_kind_from_string(const std::string& s) {
  for (PolicyKind k : {PolicyKind::enhancement_aware, PolicyKind::recovery_aware_only,
                       PolicyKind::sr_aware_only, PolicyKind::plain_qoe_argmax,
                       PolicyKind::buffer_based, PolicyKind::rate_based})
    if (s == to_string(k)) return k;
  throw ParseError("unknown policy \"" + s + "\"");
}

bool AbrPolicy::recovery_aware() const {
  return kind == PolicyKind::enhancement_aware || kind == PolicyKind::recovery_aware_only;
}

bool AbrPolicy::sr_aware() const {
  return kind == PolicyKind::enhancement_aware || kind == PolicyKind::sr_aware_only;
}

void ModelSet::validate() const {
  ladder.validate();
  quality.validate();
  cost.validate();
  if (!(qoe.rebuffer_penalty_kbps > 0))
    throw ValidationError("qoe: rebuffer penalty must be positive");
  if (!(qoe.smoothness_weight >= 0))
    throw ValidationError("qoe: smoothness weight must be non-negative");
  if (!(packet_payload_bytes >= 1)) throw ValidationError("models: packet payload must be >= 1 byte");
  if (enable_fec && fec_plan == nullptr)
    throw ConfigError("models: FEC enabled without a redundancy plan");
}

ChunkEstimate estimate_chunk_qoe(double candidate_kbps, const ClientState& state,
                                 const Predictions& pred, const ModelSet& models,
                                 const AbrPolicy& policy) {
  models.validate();
  const Rung& rung = models.ladder.rung_for_bitrate(candidate_kbps);
  if (!(pred.throughput_kbps > 0))
    throw ZeroThroughput("estimate: predicted throughput must be positive");
  if (!(pred.loss_rate >= 0 && pred.loss_rate <= 1))
    throw ValidationError("estimate: predicted loss outside [0, 1]");
  if (!(state.buffer_level_s >= 0)) throw ValidationError("estimate: negative buffer level");

  // What the policy believes the client will do. A mechanism helps only if it
  // is both switched on and modeled by this policy.
  const bool believed_recovery = models.enable_recovery && policy.recovery_aware();
  const bool believed_sr = models.enable_sr && policy.sr_aware();

  ChunkEstimate est;
  est.fec_ratio = models.enable_fec ? models.fec_plan->lookup(pred.loss_rate) : 0.0;

  const int n = models.ladder.gop_frames;
  const double dur = models.ladder.chunk_duration_s;
  // Fluid sizes: per-frame data bytes, integer packet counts, parity bytes in
  // proportion r/k (parity shards mirror data shard size).
  const double data_bytes_frame = candidate_kbps * dur * 1000.0 / 8.0 / n;
  const int k = std::max(1, static_cast<int>(std::ceil(data_bytes_frame /
                                                           models.packet_payload_bytes -
                                                       1e-9)));
  const int r = parity_for_ratio(k, est.fec_ratio);
  const double wire_bytes_frame = data_bytes_frame * (1.0 + static_cast<double>(r) / k);

  ChunkTiming timing;
  timing.t_prev_s = state.t_prev_s;
  timing.delta_s = models.ladder.frame_interval_s();
  timing.throughput_kbps = pred.throughput_kbps;
  timing.frame_bytes.assign(n, wire_bytes_frame);

  // Residual per-frame corruption after FEC, from the packet counts. The
  // policy prices this with the independent-loss tail (the burst structure is
  // not observable online); with r = 0 this is just 1-(1-p)^k.
  const double corrupt_prob = frame_loss_probability(
      k, est.fec_ratio, LossModel::bernoulli(pred.loss_rate), LossMethod::analytic);

  const double wire_kbits = wire_bytes_frame * n * 8.0 / 1000.0;
  const double download_s = wire_kbits / pred.throughput_kbps;

  int late_count = 0;
  int sr_eligible = 0;
  double recovery_stall = 0;
  if (state.startup) {
    // Playout holds for the whole first chunk, so no frame can be late and
    // frame i keeps the unplayed download tail plus i intervals of slack.
    const double sr_setup =
        models.cost.t_sr_s +
        (models.cost.decode_latency_in_sr_gate ? models.cost.decode_s(rung.resolution) : 0.0);
    for (int i = 1; i <= n; ++i) {
      const double arr_in_s = i * wire_bytes_frame * 8.0 / 1000.0 / pred.throughput_kbps;
      const double slack = (download_s - arr_in_s) + i * timing.delta_s;
      if (slack > sr_setup) ++sr_eligible;
    }
  } else {
    const ClassifiedChunk cls = classify_frames(timing, models.cost, corrupt_prob, rung.resolution);
    late_count = cls.late_count;
    sr_eligible = cls.sr_eligible_count;
    if (believed_recovery) {
      // Late frames each stall until recovery covers them (or they show up).
      for (const auto& f : cls.frames)
        if (f.kind == FrameKind::needs_recovery)
          recovery_stall += recovery_rebuffer_time(timing, models.cost, f.index);
    }
  }

  // Late frames need substitution no matter what; corruption then claims its
  // share of the on-time frames. SR only helps frames that arrive intact.
  const double exp_rec = late_count + corrupt_prob * (n - late_count);
  const double exp_sr = believed_sr ? (1.0 - corrupt_prob) * sr_eligible : 0.0;
  const double exp_plain = n - exp_rec - exp_sr;

  const double base = psnr_at(models.quality, candidate_kbps, Enhancement::none, rung.resolution);
  double psnr_sum = exp_plain * base;
  if (exp_sr > 0)
    psnr_sum += exp_sr * psnr_at(models.quality, candidate_kbps, Enhancement::sr, rung.resolution);
  if (exp_rec > 1e-12) {
    // The expected substitutions are priced as one contiguous run at the
    // chunk tail (late frames cluster there by construction of the arrival
    // curve), so each carries the quality of a run that long.
    const double run_len = std::max(1.0, exp_rec);
    psnr_sum += exp_rec * recovered_psnr(models.quality, run_len,
                                         believed_recovery ? RecoveryMode::recovery
                                                           : RecoveryMode::reuse);
  }
  const double mean_psnr = psnr_sum / n;

  // The first chunk's wall time is startup delay by convention, not a stall.
  double rebuffer = recovery_stall;
  if (!state.startup) rebuffer += std::max(0.0, download_s - state.buffer_level_s);

  est.outcome.selected_bitrate_kbps = candidate_kbps;
  est.outcome.effective_bitrate_kbps = effective_bitrate_total(models.quality, mean_psnr);
  est.outcome.rebuffer_s = rebuffer;
  est.outcome.recovered_frames = exp_rec;
  est.outcome.sr_frames = exp_sr;
  est.download_s = download_s;
  est.utility_kbps =
      models.qoe.use_effective_bitrate ? est.outcome.effective_bitrate_kbps : candidate_kbps;
  est.qoe_contribution = est.utility_kbps - models.qoe.rebuffer_penalty_kbps * rebuffer;
  return est;
}

namespace {

struct Scored {
  double bitrate = 0;
  double score = 0;
};

// Argmax over the ladder of contribution minus the smoothness step, plus the
// best continuation when looking further ahead (predictions held constant).
// Strict improvement required, so equal scores keep the lower rung.
Scored best_choice(const ClientState& state, const Predictions& pred, const ModelSet& models,
                   const AbrPolicy& policy, int depth, std::vector<ScoredCandidate>* scores) {
  Scored best;
  bool first = true;
  for (const auto& rung : models.ladder.rungs) {
    const ChunkEstimate est = estimate_chunk_qoe(rung.bitrate_kbps, state, pred, models, policy);
    double score = est.qoe_contribution;
    if (state.prev_utility_kbps)
      score -= models.qoe.smoothness_weight * std::abs(est.utility_kbps - *state.prev_utility_kbps);
    if (depth > 1) {
      // Buffer drains for the download wall time, then gains one chunk.
      const double dur = models.ladder.chunk_duration_s;
      ClientState ns = state;
      ns.buffer_level_s = std::max(0.0, state.buffer_level_s - est.download_s) + dur;
      ns.t_prev_s = state.t_prev_s + dur + est.outcome.rebuffer_s;
      ns.startup = false;
      ns.prev_selected_kbps = rung.bitrate_kbps;
      ns.prev_utility_kbps = est.utility_kbps;
      score += best_choice(ns, pred, models, policy, depth - 1, nullptr).score;
    }
    if (scores) scores->push_back({rung.bitrate_kbps, score});
    if (first || score > best.score) {
      best = {rung.bitrate_kbps, score};
      first = false;
    }
  }
  return best;
}

}  // namespace

double select_bitrate(const ClientState& state, const Predictions& pred, const ModelSet& models,
                      const AbrPolicy& policy, std::vector<ScoredCandidate>* scores) {
  models.validate();
  if (scores) scores->clear();
  if (policy.lookahead_chunks < 1) throw ConfigError("policy: lookahead must be at least 1");

  if (policy.kind == PolicyKind::rate_based) {
    // Highest rung the predicted link can carry outright.
    if (!(pred.throughput_kbps > 0)) throw ZeroThroughput("select: predicted throughput must be positive");
    double chosen = models.ladder.min_bitrate_kbps();
    for (const auto& r : models.ladder.rungs)
      if (r.bitrate_kbps <= pred.throughput_kbps) chosen = r.bitrate_kbps;
    return chosen;
  }
  if (policy.kind == PolicyKind::buffer_based) {
    // One rung per extra chunk of buffered content beyond a two-chunk floor.
    if (!(state.buffer_level_s >= 0)) throw ValidationError("select: negative buffer level");
    const double dur = models.ladder.chunk_duration_s;
    const int idx = state.buffer_level_s < 2 * dur
                        ? 0
                        : std::min(static_cast<int>(models.ladder.rungs.size()) - 1,
                                   1 + static_cast<int>((state.buffer_level_s - 2 * dur) / dur));
    return models.ladder.rungs[idx].bitrate_kbps;
  }
  return best_choice(state, pred, models, policy, policy.lookahead_chunks, scores).bitrate;
}

}  // namespace easim
