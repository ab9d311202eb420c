#include "easim/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "util.hpp"

namespace easim {

using nlohmann::json;

void SimConfig::validate() const {
  ladder.validate();
  quality.validate();
  cost.validate();
  loss_model.validate();
  if (fec_plan) fec_plan->validate();
  if (enable_fec && !fec_plan && !forced_fec_ratio)
    throw ConfigError("sim: FEC enabled without a plan or a forced ratio");
  if (!(packet_payload_bytes >= 1)) throw ValidationError("sim: packet payload must be >= 1 byte");
  if (max_chunks < 0) throw ValidationError("sim: max_chunks must be non-negative");
  if (forced_fec_ratio && !(*forced_fec_ratio >= 0))
    throw ValidationError("sim: forced FEC ratio must be non-negative");
  if (loss_override && !(*loss_override >= 0 && *loss_override <= 1))
    throw ValidationError("sim: loss override outside [0, 1]");
  if (policy.lookahead_chunks < 1) throw ConfigError("sim: lookahead must be at least 1");
  // The factories validate their smoothing constants.
  if (predictor == PredictorKind::ewma)
    (void)Predictor::ewma(ewma_alpha);
  else
    (void)Predictor::holt_winters(hw_level_alpha, hw_trend_beta);
}

ModelSet SimConfig::model_set() const {
  ModelSet ms;
  ms.ladder = ladder;
  ms.quality = quality;
  ms.cost = cost;
  ms.qoe = qoe;
  ms.fec_plan = fec_plan ? &*fec_plan : nullptr;
  ms.enable_recovery = enable_recovery;
  ms.enable_sr = enable_sr;
  ms.enable_fec = enable_fec;
  ms.packet_payload_bytes = packet_payload_bytes;
  return ms;
}

namespace {

Predictor make_predictor(const SimConfig& cfg) {
  return cfg.predictor == PredictorKind::ewma
             ? Predictor::ewma(cfg.ewma_alpha)
             : Predictor::holt_winters(cfg.hw_level_alpha, cfg.hw_trend_beta);
}

/// Piecewise-constant download integrator over the trace. Times are relative
/// to the trace start. Returns false when the trace ends first.
struct Downloader {
  const NetworkTrace& trace;
  double t0;
  double end;  // relative end time

  explicit Downloader(const NetworkTrace& tr)
      : trace(tr), t0(tr.start_s()), end(tr.end_s() - tr.start_s()) {}

  double tput_at(double t_rel) const { return trace.throughput_at(t0 + t_rel); }
  double loss_at(double t_rel) const { return trace.loss_rate_at(t0 + t_rel); }

  double next_boundary(double t_rel) const {
    const double at = t0 + t_rel;
    auto it = std::upper_bound(trace.samples.begin(), trace.samples.end(), at,
                               [](double v, const TraceSample& s) { return v < s.timestamp_s; });
    return it == trace.samples.end() ? end : it->timestamp_s - t0;
  }

  /// Advance `t` past transferring `kbits`; false if the trace ends first.
  bool transfer(double& t, double kbits) const {
    double left = kbits;
    while (left > 1e-12) {
      if (t >= end - 1e-12) return false;
      const double rate = tput_at(t);
      const double boundary = next_boundary(t);
      if (rate <= 0) {
        t = boundary;  // dead air: wall clock passes, nothing moves
        continue;
      }
      const double can = rate * (boundary - t);
      if (left <= can) {
        t += left / rate;
        return true;
      }
      left -= can;
      t = boundary;
    }
    return true;
  }
};

}  // namespace

SessionReport run_session(const NetworkTrace& trace, const SimConfig& cfg) {
  cfg.validate();
  trace.validate();

  const LadderSpec& ladder = cfg.ladder;
  const int n = ladder.gop_frames;
  const double dur = ladder.chunk_duration_s;
  const double delta = ladder.frame_interval_s();

  // When the ratio is pinned (plan building), the policy must believe that
  // same ratio, so it scores against a single-entry plan.
  FecPlan pinned;
  ModelSet ms = cfg.model_set();
  if (cfg.forced_fec_ratio) {
    pinned.scheme = "pinned";
    pinned.loss_grid = {0.0};
    pinned.ratio_grid = {*cfg.forced_fec_ratio};
    pinned.table = {*cfg.forced_fec_ratio};
    ms.fec_plan = &pinned;
  }
  ms.validate();

  LossProcess channel(cfg.loss_model, detail::mix_seed(cfg.seed, "channel"));
  Predictor tput_pred = make_predictor(cfg);
  Predictor loss_pred = make_predictor(cfg);

  Downloader net(trace);
  SessionReport rep;
  rep.trace_id = trace.id;
  rep.network = trace.kind;
  rep.scheme = !cfg.scheme_name.empty() ? cfg.scheme_name : to_string(cfg.policy.kind);

  ClientState state;
  state.startup = true;  // cleared once the first chunk is on screen
  double dl = 0;                 // wall clock of the download cursor
  double play_base = 0;          // wall clock when playout starts
  double next_due = 0;           // wall clock the next frame is due at
  double total_stall = 0;
  double psnr_total = 0;
  long frames_played = 0, frames_recovered = 0, frames_sr = 0;
  const double inf = std::numeric_limits<double>::infinity();
  double rec_free = -inf, sr_free = -inf;  // when each enhancement engine frees up
  int run_len = 0;                          // consecutive substituted frames

  std::vector<double> arr(n);
  std::vector<char> decoded(n);

  for (int chunk = 1; cfg.max_chunks == 0 || chunk <= cfg.max_chunks; ++chunk) {
    // --- decide ---------------------------------------------------------
    DecisionRecord dec;
    dec.chunk = chunk;
    dec.buffer_level_s = state.buffer_level_s;
    Predictions pred;
    if (chunk == 1) {
      // No observations yet: probe the link at the trace head (the player's
      // startup bandwidth estimate) instead of trusting an empty filter.
      pred.throughput_kbps = std::max(1.0, net.tput_at(0.0));
      pred.loss_rate = std::clamp(net.loss_at(0.0), 0.0, 1.0);
    } else {
      pred.throughput_kbps = std::max(1.0, tput_pred.prediction());
      pred.loss_rate = std::clamp(loss_pred.prediction(), 0.0, 1.0);
    }
    dec.predicted_throughput_kbps = pred.throughput_kbps;
    dec.predicted_loss = pred.loss_rate;
    const double chosen = select_bitrate(state, pred, ms, cfg.policy,
                                         cfg.record_decisions ? &dec.candidates : nullptr);
    double fec_ratio = 0;
    if (cfg.forced_fec_ratio)
      fec_ratio = *cfg.forced_fec_ratio;
    else if (cfg.enable_fec)
      fec_ratio = cfg.fec_plan->lookup(pred.loss_rate);
    dec.chosen_kbps = chosen;
    dec.fec_ratio = fec_ratio;
    if (cfg.record_decisions) rep.decisions.push_back(std::move(dec));

    const Rung& rung = ladder.rung_for_bitrate(chosen);

    // --- download -------------------------------------------------------
    const double data_bytes_frame = chosen * dur * 125.0 / n;  // kbps*s -> bytes
    const int k = std::max(
        1, static_cast<int>(std::ceil(data_bytes_frame / cfg.packet_payload_bytes - 1e-9)));
    const int r = parity_for_ratio(k, fec_ratio);
    const double wire_bytes_frame = data_bytes_frame * (1.0 + static_cast<double>(r) / k);
    const double wire_kbits_frame = wire_bytes_frame * 8.0 / 1000.0;

    const double dl_start = dl;
    long lost_pkts = 0;
    bool exhausted = false;
    for (int i = 0; i < n; ++i) {
      if (!net.transfer(dl, wire_kbits_frame)) {
        exhausted = true;
        break;
      }
      arr[i] = dl;
      channel.set_stationary_loss(
          cfg.loss_override.value_or(net.loss_at(std::min(dl, net.end))));
      int lost = 0;
      for (int p = 0; p < k + r; ++p)
        if (channel.next_lost()) ++lost;
      lost_pkts += lost;
      decoded[i] = lost <= r;  // any k of k+r shards reconstruct the frame
    }
    if (exhausted) {
      rep.truncated = true;
      break;  // a chunk only plays once fully fetched
    }

    if (chunk == 1) {
      play_base = dl;
      next_due = play_base + delta;
      rep.stats.startup_delay_s = dl;
      state.t_prev_s = play_base;
    }

    // --- play out -------------------------------------------------------
    const double base_psnr = psnr_at(cfg.quality, chosen, Enhancement::none, rung.resolution);
    const double dec_s = cfg.cost.decode_s(rung.resolution);
    double chunk_stall = 0, chunk_psnr = 0;
    int chunk_recovered = 0, chunk_sr = 0;

    for (int i = 0; i < n; ++i) {
      const double due = next_due;
      double stall = 0, psnr = base_psnr;
      FrameKind kind = FrameKind::received_no_sr;

      if (decoded[i] && arr[i] <= due) {
        // On time and intact. Upscale if the engine can finish by the deadline.
        run_len = 0;
        if (cfg.enable_sr && rung.resolution != Resolution::p1080) {
          const double ready = arr[i] + (cfg.cost.decode_latency_in_sr_gate ? dec_s : 0.0);
          const double start = std::max(ready, sr_free);
          if (start + cfg.cost.t_sr_s <= due) {
            sr_free = start + cfg.cost.t_sr_s;
            psnr = psnr_at(cfg.quality, chosen, Enhancement::sr, rung.resolution);
            kind = FrameKind::sr_eligible;
            ++chunk_sr;
          }
        }
      } else if (!cfg.enable_recovery) {
        // No recovery: the previous frame stays up, playback never waits.
        ++run_len;
        psnr = recovered_psnr(cfg.quality, run_len, RecoveryMode::reuse);
      } else {
        // The recovery engine learns a frame is missing when it fails to
        // arrive by its deadline (late) or arrives corrupt (early loss); in a
        // run it keeps synthesizing ahead without waiting for deadlines.
        const double know = run_len > 0 ? -inf : (decoded[i] ? due : std::min(arr[i], due));
        const double rec_ready = std::max(know, rec_free) + cfg.cost.t_rc_s;
        if (decoded[i] && arr[i] <= rec_ready) {
          // The real frame lands before a substitute could; just wait for it.
          stall = std::max(0.0, arr[i] - due);
          run_len = 0;
        } else {
          stall = std::max(0.0, rec_ready - due);
          rec_free = rec_ready;
          ++run_len;
          psnr = recovered_psnr(cfg.quality, run_len, RecoveryMode::recovery);
          kind = FrameKind::needs_recovery;
          ++chunk_recovered;
        }
      }

      next_due = due + stall + delta;
      chunk_stall += stall;
      chunk_psnr += psnr;
      if (cfg.record_frames) rep.per_frame.push_back({chunk, i + 1, kind, stall, psnr});
    }

    total_stall += chunk_stall;
    psnr_total += chunk_psnr;
    frames_played += n;
    frames_recovered += chunk_recovered;
    frames_sr += chunk_sr;

    ChunkOutcome out;
    out.selected_bitrate_kbps = chosen;
    out.effective_bitrate_kbps = effective_bitrate_total(cfg.quality, chunk_psnr / n);
    out.rebuffer_s = chunk_stall;
    out.recovered_frames = chunk_recovered;
    out.sr_frames = chunk_sr;
    rep.per_chunk.push_back(out);

    // --- advance client state and predictors ----------------------------
    state.startup = false;
    state.t_prev_s = next_due - delta;
    state.buffer_level_s = state.t_prev_s - dl;
    // Substituted frames (recovery or reuse) play at cadence without waiting
    // for their data, so the playhead can overtake the download cursor; the
    // buffer the selector sees is the downloaded-but-unplayed remainder.
    state.buffer_level_s = std::max(0.0, state.buffer_level_s);
    state.prev_selected_kbps = chosen;
    state.prev_utility_kbps =
        cfg.qoe.use_effective_bitrate ? out.effective_bitrate_kbps : out.selected_bitrate_kbps;

    const double realized_tput = wire_kbits_frame * n / std::max(1e-9, dl - dl_start);
    const double realized_loss =
        static_cast<double>(lost_pkts) / (static_cast<double>(k + r) * n);
    tput_pred = predict_next(tput_pred, realized_tput).first;
    loss_pred = predict_next(loss_pred, realized_loss).first;
  }

  if (rep.per_chunk.empty())
    throw EmptySession("run_session: trace " + trace.id + " ended before the first chunk");

  rep.qoe = session_qoe(rep.per_chunk, cfg.qoe);

  // Playout-clock conservation: time from first frame due to last frame shown
  // equals content played plus every stall. Checked on every session.
  const auto chunks = static_cast<double>(rep.per_chunk.size());
  // First frame is due one interval after playout starts; from there to the
  // end of the last frame's slot is exactly the content plus every stall.
  const double playout_span = next_due - delta - play_base;
  const double accounted = chunks * dur + total_stall;
  EASIM_ENSURE(std::abs(playout_span - accounted) <= 1e-9 * std::max(1.0, accounted),
               "playout clock must equal content + stalls");
  double chunk_stall_sum = 0;
  for (const auto& c : rep.per_chunk) chunk_stall_sum += c.rebuffer_s;
  EASIM_ENSURE(std::abs(chunk_stall_sum - total_stall) <= 1e-9 * std::max(1.0, total_stall),
               "per-chunk rebuffer must sum to the session total");

  rep.stats.total_rebuffer_s = total_stall;
  rep.stats.played_s = chunks * dur;
  rep.stats.mean_psnr_db = psnr_total / static_cast<double>(frames_played);
  rep.stats.recovered_fraction =
      static_cast<double>(frames_recovered) / static_cast<double>(frames_played);
  rep.stats.sr_fraction = static_cast<double>(frames_sr) / static_cast<double>(frames_played);
  double sel = 0, eff = 0;
  for (const auto& c : rep.per_chunk) {
    sel += c.selected_bitrate_kbps;
    eff += c.effective_bitrate_kbps;
  }
  rep.stats.mean_selected_kbps = sel / chunks;
  rep.stats.mean_effective_kbps = eff / chunks;
  return rep;
}

std::string decision_to_json_line(const DecisionRecord& d) {
  json j;
  j["chunk"] = d.chunk;
  json cands = json::array();
  for (const auto& c : d.candidates)
    cands.push_back(json{{"bitrate_kbps", c.bitrate_kbps}, {"score", c.score}});
  j["candidates"] = cands;
  j["chosen_kbps"] = d.chosen_kbps;
  j["predicted_throughput_kbps"] = d.predicted_throughput_kbps;
  j["predicted_loss"] = d.predicted_loss;
  j["fec_ratio"] = d.fec_ratio;
  j["buffer_level_s"] = d.buffer_level_s;
  return j.dump();
}

std::string SessionReport::to_json_text() const {
  json j;
  j["trace_id"] = trace_id;
  j["network"] = to_string(network);
  j["scheme"] = scheme;
  j["qoe"] = qoe;
  j["truncated"] = truncated;
  j["stats"] = {{"mean_selected_kbps", stats.mean_selected_kbps},
                {"mean_effective_kbps", stats.mean_effective_kbps},
                {"mean_psnr_db", stats.mean_psnr_db},
                {"total_rebuffer_s", stats.total_rebuffer_s},
                {"startup_delay_s", stats.startup_delay_s},
                {"recovered_fraction", stats.recovered_fraction},
                {"sr_fraction", stats.sr_fraction},
                {"played_s", stats.played_s}};
  json chunks = json::array();
  for (const auto& c : per_chunk)
    chunks.push_back(json{{"selected_bitrate_kbps", c.selected_bitrate_kbps},
                          {"effective_bitrate_kbps", c.effective_bitrate_kbps},
                          {"rebuffer_s", c.rebuffer_s},
                          {"recovered_frames", c.recovered_frames},
                          {"sr_frames", c.sr_frames}});
  j["per_chunk"] = chunks;
  if (!per_frame.empty()) {
    json frames = json::array();
    for (const auto& f : per_frame)
      frames.push_back(json{{"chunk", f.chunk},
                            {"index", f.index},
                            {"class", to_string(f.kind)},
                            {"stall_s", f.stall_s},
                            {"psnr_db", f.psnr_db}});
    j["per_frame"] = frames;
  }
  return j.dump(2) + "\n";
}

std::vector<SchemeSpec> SchemeSpec::default_suite() {
  auto policy = [](PolicyKind k) {
    AbrPolicy p;
    p.kind = k;
    return p;
  };
  std::vector<SchemeSpec> suite;
  // The ablation ladder: baseline first, then each mechanism switched on
  // behind a blind policy, then with a policy that plans for it, then both
  // mechanisms together, then FEC on top.
  suite.push_back({"plain", policy(PolicyKind::plain_qoe_argmax), false, false, false});
  suite.push_back({"recovery_alone", policy(PolicyKind::plain_qoe_argmax), true, false, false});
  suite.push_back({"sr_alone", policy(PolicyKind::plain_qoe_argmax), false, true, false});
  suite.push_back({"recovery_aware", policy(PolicyKind::recovery_aware_only), true, false, false});
  suite.push_back({"sr_aware", policy(PolicyKind::sr_aware_only), false, true, false});
  suite.push_back({"aware", policy(PolicyKind::enhancement_aware), true, true, false});
  suite.push_back({"aware_fec", policy(PolicyKind::enhancement_aware), true, true, true});
  return suite;
}

namespace {

int kind_rank(NetworkKind k) { return static_cast<int>(k); }

template <typename Fn>
void parallel_for(int jobs, int count, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mu;
  pool.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

MatrixResult run_matrix(const std::vector<NetworkTrace>& traces, const SimConfig& base,
                        const std::vector<SchemeSpec>& schemes, int jobs,
                        std::vector<SessionReport>* reports) {
  if (traces.empty()) throw ValidationError("run_matrix: no traces");
  if (schemes.empty()) throw ValidationError("run_matrix: no schemes");

  struct Task {
    int trace_idx;
    int scheme_idx;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < schemes.size(); ++s)
    for (std::size_t t = 0; t < traces.size(); ++t)
      tasks.push_back({static_cast<int>(t), static_cast<int>(s)});

  std::vector<MatrixRow> rows(tasks.size());
  std::vector<SessionReport> reps(reports ? tasks.size() : 0);
  parallel_for(jobs, static_cast<int>(tasks.size()), [&](int i) {
    const auto& task = tasks[static_cast<std::size_t>(i)];
    const auto& trace = traces[task.trace_idx];
    const auto& scheme = schemes[task.scheme_idx];
    SimConfig cfg = base;
    cfg.policy = scheme.policy;
    cfg.enable_recovery = scheme.enable_recovery;
    cfg.enable_sr = scheme.enable_sr;
    cfg.enable_fec = scheme.enable_fec;
    cfg.scheme_name = scheme.name;
    cfg.record_frames = reports != nullptr && base.record_frames;
    cfg.record_decisions = reports != nullptr && base.record_decisions;
    cfg.seed = detail::mix_seed(base.seed, trace.id + "/" + scheme.name);
    SessionReport rep = run_session(trace, cfg);
    rows[static_cast<std::size_t>(i)] = {trace.kind,
                                         scheme.name,
                                         trace.id,
                                         rep.qoe,
                                         rep.stats.mean_selected_kbps,
                                         rep.stats.total_rebuffer_s,
                                         rep.stats.recovered_fraction};
    if (reports) reps[static_cast<std::size_t>(i)] = std::move(rep);
  });

  // Scheme order follows the suite (baseline first), not the alphabet.
  std::vector<std::string> scheme_order;
  for (const auto& s : schemes) scheme_order.push_back(s.name);
  auto scheme_rank = [&](const std::string& name) {
    for (std::size_t i = 0; i < scheme_order.size(); ++i)
      if (scheme_order[i] == name) return static_cast<int>(i);
    return -1;
  };
  auto before = [&](NetworkKind an, const std::string& as, const std::string& at, NetworkKind bn,
                    const std::string& bs, const std::string& bt) {
    if (kind_rank(an) != kind_rank(bn)) return kind_rank(an) < kind_rank(bn);
    if (as != bs) return scheme_rank(as) < scheme_rank(bs);
    return at < bt;
  };
  std::sort(rows.begin(), rows.end(), [&](const MatrixRow& a, const MatrixRow& b) {
    return before(a.network, a.scheme, a.trace_id, b.network, b.scheme, b.trace_id);
  });
  if (reports) {
    std::sort(reps.begin(), reps.end(), [&](const SessionReport& a, const SessionReport& b) {
      return before(a.network, a.scheme, a.trace_id, b.network, b.scheme, b.trace_id);
    });
    *reports = std::move(reps);
  }

  MatrixResult res;
  res.rows = std::move(rows);
  res.baseline_scheme = schemes.front().name;

  for (const auto& row : res.rows) {
    MatrixCell* cell = nullptr;
    for (auto& c : res.cells)
      if (c.network == row.network && c.scheme == row.scheme) { cell = &c; break; }
    if (!cell) {
      res.cells.push_back({});
      cell = &res.cells.back();
      cell->network = row.network;
      cell->scheme = row.scheme;
    }
    ++cell->sessions;
    cell->qoe += row.qoe;
    cell->mean_bitrate_kbps += row.mean_bitrate_kbps;
    cell->rebuffer_s += row.rebuffer_s;
    cell->recovered_frac += row.recovered_frac;
  }
  for (auto& c : res.cells) {
    c.qoe /= c.sessions;
    c.mean_bitrate_kbps /= c.sessions;
    c.rebuffer_s /= c.sessions;
    c.recovered_frac /= c.sessions;
  }
  for (auto& c : res.cells) {
    for (const auto& b : res.cells) {
      if (b.network == c.network && b.scheme == res.baseline_scheme) {
        c.qoe_lift_vs_baseline = b.qoe == 0 ? 0 : (c.qoe - b.qoe) / std::abs(b.qoe);
        break;
      }
    }
  }
  return res;
}

std::string MatrixResult::rows_csv() const {
  std::string out = "network,scheme,trace_id,qoe,mean_bitrate,rebuffer_s,recovered_frac\n";
  for (const auto& r : rows) {
    out += to_string(r.network);
    out += ',';
    out += r.scheme;
    out += ',';
    out += r.trace_id;
    out += ',';
    out += detail::fmt(r.qoe);
    out += ',';
    out += detail::fmt(r.mean_bitrate_kbps);
    out += ',';
    out += detail::fmt(r.rebuffer_s);
    out += ',';
    out += detail::fmt(r.recovered_frac);
    out += '\n';
  }
  return out;
}

std::string MatrixResult::cells_csv() const {
  std::string out = "network,scheme,sessions,qoe,mean_bitrate,rebuffer_s,recovered_frac,qoe_lift_vs_" +
                    baseline_scheme + "\n";
  for (const auto& c : cells) {
    out += to_string(c.network);
    out += ',';
    out += c.scheme;
    out += ',';
    out += std::to_string(c.sessions);
    out += ',';
    out += detail::fmt(c.qoe);
    out += ',';
    out += detail::fmt(c.mean_bitrate_kbps);
    out += ',';
    out += detail::fmt(c.rebuffer_s);
    out += ',';
    out += detail::fmt(c.recovered_frac);
    out += ',';
    out += detail::fmt(c.qoe_lift_vs_baseline);
    out += '\n';
  }
  return out;
}

FecPlan build_fec_plan(const std::vector<NetworkTrace>& training, const SimConfig& base,
                       const PlanBuildOptions& opts) {
  if (training.empty()) throw ValidationError("build_fec_plan: no training traces");
  if (opts.loss_grid.empty() || opts.ratio_grid.empty())
    throw ValidationError("build_fec_plan: empty grid");

  const int n_loss = static_cast<int>(opts.loss_grid.size());
  const int n_ratio = static_cast<int>(opts.ratio_grid.size());
  std::vector<double> mean_qoe(static_cast<std::size_t>(n_loss) * n_ratio, 0.0);

  parallel_for(opts.jobs, n_loss * n_ratio, [&](int cell) {
    const int li = cell / n_ratio;
    const int ri = cell % n_ratio;
    double acc = 0;
    for (const auto& trace : training) {
      SimConfig cfg = base;
      cfg.enable_fec = true;
      cfg.fec_plan.reset();
      cfg.forced_fec_ratio = opts.ratio_grid[ri];
      cfg.loss_override = opts.loss_grid[li];
      cfg.record_frames = false;
      cfg.record_decisions = false;
      cfg.seed = detail::mix_seed(base.seed, "plan/" + trace.id + "/" + detail::fmt(opts.loss_grid[li], 4) +
                                                 "/" + detail::fmt(opts.ratio_grid[ri], 4));
      acc += run_session(trace, cfg).qoe;
    }
    mean_qoe[static_cast<std::size_t>(cell)] = acc / static_cast<double>(training.size());
  });

  FecPlan plan;
  // Tables are per policy kind: what the rate selector believes shapes which
  // redundancy pays off.
  plan.scheme = to_string(base.policy.kind);
  plan.loss_grid = opts.loss_grid;
  plan.ratio_grid = opts.ratio_grid;
  plan.table.resize(opts.loss_grid.size());
  for (int li = 0; li < n_loss; ++li) {
    int best = 0;
    for (int ri = 1; ri < n_ratio; ++ri)
      if (mean_qoe[static_cast<std::size_t>(li) * n_ratio + ri] >
          mean_qoe[static_cast<std::size_t>(li) * n_ratio + best])
        best = ri;  // strict >: ties keep the lower ratio
    plan.table[static_cast<std::size_t>(li)] = opts.ratio_grid[static_cast<std::size_t>(best)];
  }
  plan.validate();
  return plan;
}

}  // namespace easim
