// Session scoring and rate selection: frozen fixtures, invariants, and a
// brute-force reimplementation of the argmax.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "easim/abr.hpp"
#include "easim/errors.hpp"
#include "support.hpp"

using namespace easim;

namespace {

ModelSet default_models() {
  ModelSet m;
  m.ladder = LadderSpec::default_ladder();
  m.quality = QualityModel::default_model();
  m.cost = EnhancementCost::default_cost();
  return m;
}

AbrPolicy policy_of(PolicyKind k, int lookahead = 1) {
  AbrPolicy p;
  p.kind = k;
  p.lookahead_chunks = lookahead;
  return p;
}

FecPlan tiny_plan() {
  FecPlan p;
  p.scheme = "enhancement_aware";
  p.loss_grid = {0.0, 0.05};
  p.ratio_grid = {0.0, 0.25};
  p.table = {0.0, 0.25};
  return p;
}

}  // namespace

TEST_CASE("session score fixtures (nominal-bitrate utility)") {
  QoEConfig cfg;
  cfg.use_effective_bitrate = false;

  SUBCASE("single clean chunk scores its bitrate") {
    const ChunkOutcome c{2640, 2640, 0, 0, 0};
    CHECK(session_qoe(std::vector<ChunkOutcome>{c}, cfg) == doctest::Approx(2640.0));
  }
  SUBCASE("steady quality has no switching cost") {
    const std::vector<ChunkOutcome> v(2, ChunkOutcome{1024, 1024, 0, 0, 0});
    CHECK(session_qoe(v, cfg) == doctest::Approx(1024.0));
  }
  SUBCASE("stalls and a hard switch can push the score negative") {
    cfg.rebuffer_penalty_kbps = 4400;
    const std::vector<ChunkOutcome> v = {{512, 512, 0.5, 0, 0}, {4400, 4400, 0, 0, 0}};
    // (512 + 4400 - 4400*0.5 - |4400-512|) / 2
    CHECK(session_qoe(v, cfg) == doctest::Approx(-588.0).epsilon(1e-9));
  }
}

TEST_CASE("session score structure") {
  QoEConfig cfg;
  cfg.use_effective_bitrate = false;

  CHECK_THROWS_AS(session_qoe(std::vector<ChunkOutcome>{}, cfg), EmptySession);

  SUBCASE("weights are validated") {
    QoEConfig bad = cfg;
    bad.rebuffer_penalty_kbps = 0;
    CHECK_THROWS_AS(session_qoe(std::vector<ChunkOutcome>(1), bad), ValidationError);
    bad = cfg;
    bad.smoothness_weight = -1;
    CHECK_THROWS_AS(session_qoe(std::vector<ChunkOutcome>(1), bad), ValidationError);
  }
  SUBCASE("more stalling always scores worse") {
    std::vector<ChunkOutcome> v(3, ChunkOutcome{1600, 1600, 0, 0, 0});
    const double clean = session_qoe(v, cfg);
    v[1].rebuffer_s = 0.3;
    CHECK(session_qoe(v, cfg) < clean);
  }
  SUBCASE("switch cost reads the utility column the config selects") {
    std::vector<ChunkOutcome> v = {{1024, 900, 0, 0, 0}, {1024, 700, 0, 0, 0}};
    CHECK(session_qoe(v, cfg) == doctest::Approx(1024.0));  // nominal: no step
    QoEConfig eff = cfg;
    eff.use_effective_bitrate = true;
    CHECK(session_qoe(v, eff) == doctest::Approx((900 + 700 - 200) / 2.0));
  }
  SUBCASE("a reversed session scores the same") {
    std::vector<ChunkOutcome> v = {
        {512, 512, 0.1, 0, 0}, {1600, 1600, 0, 0, 0}, {1024, 1024, 0.2, 0, 0}};
    const double fwd = session_qoe(v, cfg);
    std::reverse(v.begin(), v.end());
    CHECK(session_qoe(v, cfg) == doctest::Approx(fwd).epsilon(1e-12));
  }
}

TEST_CASE("chunk estimation on an easy link is loss-free top quality") {
  const ModelSet m = default_models();
  ClientState st;
  st.buffer_level_s = 1e9;
  const Predictions pred{50000.0, 0.0};

  const ChunkEstimate est =
      estimate_chunk_qoe(4400, st, pred, m, policy_of(PolicyKind::plain_qoe_argmax));
  CHECK(est.outcome.selected_bitrate_kbps == 4400);
  CHECK(est.outcome.effective_bitrate_kbps == doctest::Approx(4400.0).epsilon(1e-9));
  CHECK(est.outcome.rebuffer_s == doctest::Approx(0.0));
  CHECK(est.outcome.recovered_frames == doctest::Approx(0.0));
  CHECK(est.outcome.sr_frames == doctest::Approx(0.0));
  CHECK(est.fec_ratio == 0.0);
  // 2.75 MB chunk over 50 Mbps.
  CHECK(est.download_s == doctest::Approx(4.0 * 4400 / 50000).epsilon(1e-9));
  CHECK(est.qoe_contribution == doctest::Approx(4400.0).epsilon(1e-9));

  SUBCASE("input validation") {
    CHECK_THROWS_AS(estimate_chunk_qoe(2000, st, pred, m, policy_of(PolicyKind::plain_qoe_argmax)),
                    OutOfRange);
    CHECK_THROWS_AS(
        estimate_chunk_qoe(4400, st, Predictions{0, 0}, m, policy_of(PolicyKind::plain_qoe_argmax)),
        ZeroThroughput);
    CHECK_THROWS_AS(
        estimate_chunk_qoe(4400, st, Predictions{5000, 1.5}, m,
                           policy_of(PolicyKind::plain_qoe_argmax)),
        ValidationError);
    ClientState neg = st;
    neg.buffer_level_s = -1;
    CHECK_THROWS_AS(estimate_chunk_qoe(4400, neg, pred, m, policy_of(PolicyKind::plain_qoe_argmax)),
                    ValidationError);
  }
}

TEST_CASE("awareness of client mechanisms raises the priced utility under loss") {
  const ModelSet m = default_models();
  ClientState st;
  st.buffer_level_s = 20;
  const Predictions pred{9000.0, 0.05};

  const ChunkEstimate aware =
      estimate_chunk_qoe(4400, st, pred, m, policy_of(PolicyKind::enhancement_aware));
  const ChunkEstimate plain =
      estimate_chunk_qoe(4400, st, pred, m, policy_of(PolicyKind::plain_qoe_argmax));
  // Both see the same corruption, but the aware policy prices substitutions at
  // recovery quality instead of frozen-frame quality.
  CHECK(aware.outcome.recovered_frames == doctest::Approx(plain.outcome.recovered_frames));
  CHECK(aware.utility_kbps > plain.utility_kbps);

  SUBCASE("awareness of a disabled mechanism changes nothing") {
    ModelSet off = m;
    off.enable_recovery = false;
    off.enable_sr = false;
    const ChunkEstimate a = estimate_chunk_qoe(4400, st, pred, off,
                                               policy_of(PolicyKind::enhancement_aware));
    const ChunkEstimate p = estimate_chunk_qoe(4400, st, pred, off,
                                               policy_of(PolicyKind::plain_qoe_argmax));
    CHECK(a.utility_kbps == p.utility_kbps);
    CHECK(a.outcome.rebuffer_s == p.outcome.rebuffer_s);
    CHECK(a.qoe_contribution == p.qoe_contribution);
  }
}

TEST_CASE("a redundancy plan pads the wire size and cuts residual corruption") {
  ModelSet m = default_models();
  const FecPlan plan = tiny_plan();
  m.fec_plan = &plan;
  ClientState st;
  st.buffer_level_s = 20;
  const Predictions pred{9000.0, 0.05};
  const AbrPolicy pol = policy_of(PolicyKind::enhancement_aware);

  const ChunkEstimate bare = estimate_chunk_qoe(4400, st, pred, m, pol);
  m.enable_fec = true;
  const ChunkEstimate fec = estimate_chunk_qoe(4400, st, pred, m, pol);

  CHECK(bare.fec_ratio == 0.0);
  CHECK(fec.fec_ratio == doctest::Approx(0.25));
  // 20 data packets per frame gain 5 parity packets: 25% more wire time.
  CHECK(fec.download_s == doctest::Approx(bare.download_s * 1.25).epsilon(1e-9));
  CHECK(fec.outcome.recovered_frames < bare.outcome.recovered_frames);

  SUBCASE("enabling FEC without a plan is a configuration error") {
    ModelSet broken = default_models();
    broken.enable_fec = true;
    CHECK_THROWS_AS(estimate_chunk_qoe(4400, st, pred, broken, pol), ConfigError);
  }
}

TEST_CASE("startup chunks charge no stall and cannot be late") {
  const ModelSet m = default_models();
  ClientState st;
  st.buffer_level_s = 0;
  st.startup = true;
  // A link slower than the encode: mid-session this would stall badly.
  const Predictions pred{3000.0, 0.0};
  const ChunkEstimate est =
      estimate_chunk_qoe(4400, st, pred, m, policy_of(PolicyKind::enhancement_aware));
  CHECK(est.outcome.rebuffer_s == 0.0);
  CHECK(est.outcome.recovered_frames == doctest::Approx(0.0));
  CHECK(est.download_s > 4.0);  // wall time still reported for startup delay
}

TEST_CASE("selection equals a brute-force scan of the ladder") {
  const ModelSet base = default_models();
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> buf(0.0, 40.0);
  std::uniform_real_distribution<double> tput(400.0, 60000.0);
  std::uniform_real_distribution<double> loss(0.0, 0.12);
  std::uniform_int_distribution<int> pick_prev(0, 5);
  std::uniform_int_distribution<int> pick_pol(0, 3);
  const PolicyKind pols[] = {PolicyKind::enhancement_aware, PolicyKind::recovery_aware_only,
                             PolicyKind::sr_aware_only, PolicyKind::plain_qoe_argmax};

  for (int trial = 0; trial < 1000; ++trial) {
    ModelSet m = base;
    m.enable_recovery = trial % 2 == 0;
    m.enable_sr = trial % 3 != 0;
    ClientState st;
    st.buffer_level_s = buf(rng);
    st.t_prev_s = 8.0;
    const int prev = pick_prev(rng);
    if (prev < 5) {
      st.prev_selected_kbps = m.ladder.rungs[prev].bitrate_kbps;
      st.prev_utility_kbps = m.ladder.rungs[prev].bitrate_kbps * 0.9;
    }
    const Predictions pred{tput(rng), loss(rng)};
    const AbrPolicy pol = policy_of(pols[pick_pol(rng)]);

    double best_rate = 0, best_score = 0;
    bool first = true;
    for (const auto& r : m.ladder.rungs) {
      const ChunkEstimate est = estimate_chunk_qoe(r.bitrate_kbps, st, pred, m, pol);
      double score = est.qoe_contribution;
      if (st.prev_utility_kbps)
        score -= m.qoe.smoothness_weight * std::abs(est.utility_kbps - *st.prev_utility_kbps);
      if (first || score > best_score) {
        best_rate = r.bitrate_kbps;
        best_score = score;
        first = false;
      }
    }
    CAPTURE(trial);
    REQUIRE(select_bitrate(st, pred, m, pol) == best_rate);
  }
}

TEST_CASE("two-chunk lookahead equals the expanded recursion") {
  const ModelSet m = default_models();
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> buf(0.0, 30.0);
  std::uniform_real_distribution<double> tput(600.0, 30000.0);
  std::uniform_real_distribution<double> loss(0.0, 0.08);

  for (int trial = 0; trial < 100; ++trial) {
    ClientState st;
    st.buffer_level_s = buf(rng);
    st.t_prev_s = 12.0;
    st.prev_utility_kbps = 1600.0;
    const Predictions pred{tput(rng), loss(rng)};
    const AbrPolicy pol = policy_of(PolicyKind::enhancement_aware, 2);

    auto level_score = [&](const ClientState& s, bool smooth_against_prev,
                           auto&& self, int depth) -> std::pair<double, double> {
      double best_rate = 0, best = 0;
      bool first = true;
      for (const auto& r : m.ladder.rungs) {
        const ChunkEstimate est = estimate_chunk_qoe(r.bitrate_kbps, s, pred, m, pol);
        double score = est.qoe_contribution;
        if (s.prev_utility_kbps)
          score -= m.qoe.smoothness_weight * std::abs(est.utility_kbps - *s.prev_utility_kbps);
        if (depth > 1) {
          ClientState ns = s;
          ns.buffer_level_s = std::max(0.0, s.buffer_level_s - est.download_s) +
                              m.ladder.chunk_duration_s;
          ns.t_prev_s = s.t_prev_s + m.ladder.chunk_duration_s + est.outcome.rebuffer_s;
          ns.startup = false;
          ns.prev_selected_kbps = r.bitrate_kbps;
          ns.prev_utility_kbps = est.utility_kbps;
          score += self(ns, true, self, depth - 1).second;
        }
        if (first || score > best) {
          best_rate = r.bitrate_kbps;
          best = score;
          first = false;
        }
      }
      (void)smooth_against_prev;
      return {best_rate, best};
    };
    const auto want = level_score(st, true, level_score, 2);
    CAPTURE(trial);
    REQUIRE(select_bitrate(st, pred, m, pol) == want.first);
  }
}

TEST_CASE("equal scores keep the lower rung") {
  // Nominal utility, no loss, deep buffer: contribution equals the bitrate, so
  // with unit smoothness weight every rung at or above the previous utility
  // scores the same and the argmax must stick with the lowest of them.
  ModelSet m = default_models();
  m.qoe.use_effective_bitrate = false;
  ClientState st;
  st.buffer_level_s = 1e9;
  st.prev_selected_kbps = 1024;
  st.prev_utility_kbps = 1024;
  const Predictions pred{1e9, 0.0};

  std::vector<ScoredCandidate> scores;
  const double got =
      select_bitrate(st, pred, m, policy_of(PolicyKind::plain_qoe_argmax), &scores);
  CHECK(got == 1024);
  REQUIRE(scores.size() == 5);
  CHECK(scores[0].score == doctest::Approx(0.0).epsilon(1e-9));      // 512: pays the down-switch
  for (int i = 1; i < 5; ++i) CHECK(scores[i].score == doctest::Approx(1024.0).epsilon(1e-9));
}

TEST_CASE("selection always lands on the ladder") {
  const ModelSet m = default_models();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> buf(0.0, 50.0);
  std::uniform_real_distribution<double> tput(300.0, 90000.0);
  const PolicyKind all[] = {PolicyKind::enhancement_aware, PolicyKind::plain_qoe_argmax,
                            PolicyKind::buffer_based, PolicyKind::rate_based};
  for (int trial = 0; trial < 200; ++trial) {
    ClientState st;
    st.buffer_level_s = buf(rng);
    const Predictions pred{tput(rng), 0.02};
    const double got = select_bitrate(st, pred, m, policy_of(all[trial % 4]));
    CHECK_NOTHROW(m.ladder.rung_for_bitrate(got));
  }
}

TEST_CASE("a starving link drives the argmax to the bottom rung") {
  const ModelSet m = default_models();
  ClientState st;
  st.buffer_level_s = 0;
  const Predictions pred{600.0, 0.0};
  CHECK(select_bitrate(st, pred, m, policy_of(PolicyKind::enhancement_aware)) == 512);
}

TEST_CASE("threshold baselines") {
  const ModelSet m = default_models();
  ClientState st;
  st.buffer_level_s = 10;

  SUBCASE("rate-based takes the highest rung under the prediction") {
    CHECK(select_bitrate(st, Predictions{20000, 0}, m, policy_of(PolicyKind::rate_based)) == 4400);
    CHECK(select_bitrate(st, Predictions{1400, 0}, m, policy_of(PolicyKind::rate_based)) == 1024);
    CHECK(select_bitrate(st, Predictions{1600, 0}, m, policy_of(PolicyKind::rate_based)) == 1600);
    CHECK(select_bitrate(st, Predictions{300, 0}, m, policy_of(PolicyKind::rate_based)) == 512);
    CHECK_THROWS_AS(select_bitrate(st, Predictions{0, 0}, m, policy_of(PolicyKind::rate_based)),
                    ZeroThroughput);
  }
  SUBCASE("buffer-based climbs one rung per buffered chunk past the floor") {
    const Predictions pred{9000, 0};
    auto at = [&](double level) {
      ClientState s;
      s.buffer_level_s = level;
      return select_bitrate(s, pred, m, policy_of(PolicyKind::buffer_based));
    };
    CHECK(at(0.0) == 512);
    CHECK(at(7.9) == 512);
    CHECK(at(8.0) == 1024);
    CHECK(at(12.0) == 1600);
    CHECK(at(16.0) == 2640);
    CHECK(at(20.0) == 4400);
    CHECK(at(500.0) == 4400);
  }
  SUBCASE("threshold baselines leave the score list empty") {
    std::vector<ScoredCandidate> scores = {{1, 1}};
    select_bitrate(st, Predictions{9000, 0}, m, policy_of(PolicyKind::buffer_based), &scores);
    CHECK(scores.empty());
  }
}

TEST_CASE("selection configuration errors") {
  const ModelSet m = default_models();
  ClientState st;
  const Predictions pred{9000, 0};
  CHECK_THROWS_AS(
      select_bitrate(st, pred, m, policy_of(PolicyKind::enhancement_aware, 0)), ConfigError);
  ModelSet bad = m;
  bad.qoe.rebuffer_penalty_kbps = 0;
  CHECK_THROWS_AS(select_bitrate(st, pred, bad, policy_of(PolicyKind::enhancement_aware)),
                  ValidationError);
}
