#include "easim/fec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "util.hpp"

namespace easim {

namespace {

// GF(2^8) with the AES-adjacent primitive polynomial x^8+x^4+x^3+x^2+1
// (0x11d). exp is doubled so products of logs never need a mod.
struct GfTables {
  std::uint8_t exp[512];
  std::uint8_t log[256];
  GfTables() {
    int x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = static_cast<std::uint8_t>(x);
      log[x] = static_cast<std::uint8_t>(i);
      x <<= 1;
      if (x & 0x100) x ^= 0x11d;
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
    log[0] = 0;  // never read; gf_mul short-circuits on zero
  }
};

const GfTables gf;

inline std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  return gf.exp[gf.log[a] + gf.log[b]];
}

inline std::uint8_t gf_inv(std::uint8_t a) {
  if (a == 0) throw DecodeError("gf: division by zero");
  return gf.exp[255 - gf.log[a]];
}

inline std::uint8_t gf_div(std::uint8_t a, std::uint8_t b) { return gf_mul(a, gf_inv(b)); }

// Row j of the Cauchy parity block: C[j][i] = 1 / (x_j ^ y_i) with x_j = k+j,
// y_i = i. All x, y distinct in GF(256) while k + r <= 255, which makes every
// square submatrix of [I; C] invertible — any k of the k+r shards suffice.
std::vector<std::uint8_t> cauchy_row(int k, int j) {
  std::vector<std::uint8_t> row(k);
  for (int i = 0; i < k; ++i)
    row[i] = gf_inv(static_cast<std::uint8_t>((k + j) ^ i));
  return row;
}

}  // namespace

void FecConfig::validate() const {
  if (data_shards < 1) throw ValidationError("fec: data_shards must be at least 1");
  if (parity_shards < 0) throw ValidationError("fec: parity_shards must be non-negative");
  if (data_shards + parity_shards > 255)
    throw ConfigError("fec: data_shards + parity_shards must not exceed 255");
  if (shard_size < 1) throw ValidationError("fec: shard_size must be at least 1");
}

double FecConfig::redundancy_ratio() const {
  return static_cast<double>(parity_shards) / data_shards;
}

std::vector<Shard> fec_encode(const FecConfig& cfg, std::span<const std::uint8_t> payload) {
  cfg.validate();
  const std::size_t capacity =
      static_cast<std::size_t>(cfg.data_shards) * static_cast<std::size_t>(cfg.shard_size);
  if (payload.size() > capacity)
    throw ValidationError("fec: payload of " + std::to_string(payload.size()) +
                          " bytes exceeds " + std::to_string(capacity));
  std::vector<Shard> shards(cfg.total_shards(), Shard(cfg.shard_size, 0));
  for (std::size_t i = 0; i < payload.size(); ++i)
    shards[i / cfg.shard_size][i % cfg.shard_size] = payload[i];
  for (int j = 0; j < cfg.parity_shards; ++j) {
    const auto row = cauchy_row(cfg.data_shards, j);
    Shard& parity = shards[cfg.data_shards + j];
    for (int i = 0; i < cfg.data_shards; ++i) {
      const std::uint8_t c = row[i];
      if (c == 0) continue;
      const Shard& src = shards[i];
      for (int b = 0; b < cfg.shard_size; ++b) parity[b] ^= gf_mul(c, src[b]);
    }
  }
  return shards;
}

std::vector<std::uint8_t> fec_decode(const FecConfig& cfg,
                                     const std::vector<std::optional<Shard>>& shards) {
  cfg.validate();
  if (static_cast<int>(shards.size()) != cfg.total_shards())
    throw ValidationError("fec: expected " + std::to_string(cfg.total_shards()) +
                          " shard slots, got " + std::to_string(shards.size()));
  const int k = cfg.data_shards;

  std::vector<int> have;
  for (int i = 0; i < cfg.total_shards(); ++i) {
    if (!shards[i]) continue;
    if (static_cast<int>(shards[i]->size()) != cfg.shard_size)
      throw ValidationError("fec: shard " + std::to_string(i) + " has wrong size");
    have.push_back(i);
  }
  if (static_cast<int>(have.size()) < k)
    throw DecodeError("fec: " + std::to_string(have.size()) + " shards present, need " +
                      std::to_string(k));

  std::vector<std::uint8_t> out(static_cast<std::size_t>(k) * cfg.shard_size);
  const bool all_data = std::all_of(have.begin(), have.begin() + k,
                                    [k](int i) { return i < k; });
  if (all_data) {
    for (int i = 0; i < k; ++i)
      std::memcpy(out.data() + static_cast<std::size_t>(i) * cfg.shard_size, shards[i]->data(),
                  cfg.shard_size);
    return out;
  }

  // Solve M * data = rows for the k x k system given by the first k surviving
  // shards: unit rows for data shards, Cauchy rows for parity shards.
  // Gauss-Jordan over GF(256), applying the same row ops to the shard bytes.
  std::vector<std::vector<std::uint8_t>> m(k);
  std::vector<Shard> rhs(k);
  for (int r = 0; r < k; ++r) {
    const int idx = have[r];
    if (idx < k) {
      m[r].assign(k, 0);
      m[r][idx] = 1;
    } else {
      m[r] = cauchy_row(k, idx - k);
    }
    rhs[r] = *shards[idx];
  }

  for (int col = 0; col < k; ++col) {
    int pivot = -1;
    for (int r = col; r < k; ++r)
      if (m[r][col] != 0) { pivot = r; break; }
    if (pivot < 0) throw DecodeError("fec: singular decode matrix");  // cannot happen for Cauchy
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);

    const std::uint8_t inv = gf_inv(m[col][col]);
    if (inv != 1) {
      for (int c = 0; c < k; ++c) m[col][c] = gf_mul(m[col][c], inv);
      for (int b = 0; b < cfg.shard_size; ++b) rhs[col][b] = gf_mul(rhs[col][b], inv);
    }
    for (int r = 0; r < k; ++r) {
      if (r == col || m[r][col] == 0) continue;
      const std::uint8_t f = m[r][col];
      for (int c = 0; c < k; ++c) m[r][c] ^= gf_mul(f, m[col][c]);
      for (int b = 0; b < cfg.shard_size; ++b) rhs[r][b] ^= gf_mul(f, rhs[col][b]);
    }
  }

  for (int i = 0; i < k; ++i)
    std::memcpy(out.data() + static_cast<std::size_t>(i) * cfg.shard_size, rhs[i].data(),
                cfg.shard_size);
  return out;
}

std::vector<std::uint8_t> fec_decode(const FecConfig& cfg, const std::vector<IndexedShard>& shards) {
  cfg.validate();
  std::vector<std::optional<Shard>> slots(cfg.total_shards());
  for (const IndexedShard& s : shards) {
    if (s.index < 0 || s.index >= cfg.total_shards())
      throw ValidationError("fec: shard index " + std::to_string(s.index) + " outside 0.." +
                            std::to_string(cfg.total_shards() - 1));
    if (slots[s.index])
      throw ValidationError("fec: duplicate shard index " + std::to_string(s.index));
    slots[s.index] = s.bytes;
  }
  return fec_decode(cfg, slots);
}

int parity_for_ratio(int data_shards, double ratio) {
  if (data_shards < 1) throw ValidationError("fec: data_shards must be at least 1");
  if (ratio < 0) throw ValidationError("fec: redundancy ratio must be non-negative");
  // Guard the epsilon above exact products (0.3 * 20 is a hair over 6.0).
  return static_cast<int>(std::ceil(ratio * data_shards - 1e-9));
}

LossModel LossModel::bernoulli(double loss_rate) {
  LossModel m;
  m.kind = LossKind::bernoulli;
  m.loss_rate = loss_rate;
  m.validate();
  return m;
}

LossModel LossModel::bursty(double stationary_loss, double mean_burst_len, double loss_in_bad) {
  if (!(mean_burst_len >= 1)) throw ValidationError("loss: mean burst length must be at least 1");
  LossModel m;
  m.kind = LossKind::gilbert_elliott;
  m.p_bad_to_good = 1.0 / mean_burst_len;
  m.loss_in_bad = loss_in_bad;
  m.loss_in_good = 0;
  m.p_good_to_bad = 0;  // placed by with_stationary_loss
  m.validate();
  return m.with_stationary_loss(stationary_loss);
}

void LossModel::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0 && p <= 1)) throw ValidationError(std::string("loss: ") + name + " outside [0, 1]");
  };
  if (kind == LossKind::bernoulli) {
    prob(loss_rate, "loss_rate");
    return;
  }
  prob(p_good_to_bad, "p_good_to_bad");
  prob(p_bad_to_good, "p_bad_to_good");
  prob(loss_in_bad, "loss_in_bad");
  prob(loss_in_good, "loss_in_good");
  if (p_bad_to_good == 0) throw ValidationError("loss: the bad state must be escapable");
  if (loss_in_bad < loss_in_good)
    throw ValidationError("loss: loss_in_bad must be at least loss_in_good");
}

double LossModel::stationary_loss() const {
  if (kind == LossKind::bernoulli) return loss_rate;
  if (p_good_to_bad == 0) return loss_in_good;
  const double pi_bad = p_good_to_bad / (p_good_to_bad + p_bad_to_good);
  return pi_bad * loss_in_bad + (1 - pi_bad) * loss_in_good;
}

LossModel LossModel::with_stationary_loss(double stationary_loss) const {
  LossModel m = *this;
  if (kind == LossKind::bernoulli) {
    m.loss_rate = stationary_loss;
    m.validate();
    return m;
  }
  if (loss_in_bad == loss_in_good) {
    if (std::abs(stationary_loss - loss_in_bad) > 1e-12)
      throw ValidationError("loss: per-state rates are equal; stationary loss is fixed");
    return m;
  }
  const double pi_bad = (stationary_loss - loss_in_good) / (loss_in_bad - loss_in_good);
  if (!(pi_bad >= 0) || !(pi_bad < 1))
    throw ValidationError("loss: stationary loss " + detail::fmt(stationary_loss, 4) +
                          " unreachable with per-state rates [" + detail::fmt(loss_in_good, 4) +
                          ", " + detail::fmt(loss_in_bad, 4) + ")");
  // pi_bad = g2b / (g2b + b2g) tops out at 1 / (1 + b2g) once g2b saturates
  // at 1, so the burst structure caps the reachable stationary loss below
  // loss_in_bad.
  const double g2b = p_bad_to_good * pi_bad / (1 - pi_bad);
  if (g2b > 1 + 1e-9) {
    const double cap = loss_in_good + (loss_in_bad - loss_in_good) / (1.0 + p_bad_to_good);
    throw ValidationError("loss: stationary loss " + detail::fmt(stationary_loss, 4) +
                          " beyond the reachable cap " + detail::fmt(cap, 4) +
                          " for this burst structure");
  }
  m.p_good_to_bad = std::min(1.0, g2b);
  m.validate();
  return m;
}

LossProcess::LossProcess(const LossModel& model, std::uint64_t seed) : model_(model), rng_(seed) {
  model_.validate();
  if (model_.kind == LossKind::gilbert_elliott) {
    const double pi_bad = model_.p_good_to_bad == 0
                              ? 0.0
                              : model_.p_good_to_bad / (model_.p_good_to_bad + model_.p_bad_to_good);
    in_bad_ = uniform() < pi_bad;
  }
}

double LossProcess::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
}

bool LossProcess::next_lost() {
  if (model_.kind == LossKind::bernoulli) return uniform() < model_.loss_rate;
  const bool lost = uniform() < (in_bad_ ? model_.loss_in_bad : model_.loss_in_good);
  if (in_bad_) {
    if (uniform() < model_.p_bad_to_good) in_bad_ = false;
  } else {
    if (uniform() < model_.p_good_to_bad) in_bad_ = true;
  }
  return lost;
}

void LossProcess::set_stationary_loss(double stationary_loss) {
  if (model_.kind == LossKind::bernoulli) {
    model_.loss_rate = std::clamp(stationary_loss, 0.0, 1.0);
    return;
  }
  if (model_.loss_in_bad == model_.loss_in_good) return;
  // Keep the chain state; clamp into the reachable mix of the two states so a
  // trace sample at or beyond the chain's reach still produces a (maximally
  // bursty) channel instead of an error. With p_good_to_bad capped at 1 the
  // bad-state share tops out at 1 / (1 + p_bad_to_good).
  const double lo = model_.loss_in_good;
  const double hi = model_.loss_in_good +
                    (model_.loss_in_bad - model_.loss_in_good) / (1.0 + model_.p_bad_to_good);
  model_ = model_.with_stationary_loss(std::clamp(stationary_loss, lo, hi));
}

namespace {

double binomial_tail_above(int n, int r, double p) {
  // P[X > r] for X ~ Bin(n, p) by the upward term recurrence, summing the
  // upper tail directly: 1 - P[X <= r] would cancel away ~9 digits when the
  // tail is ~1e-7, and callers compare these values at 1e-9 relative.
  if (r >= n) return 0.0;
  if (p <= 0) return 0.0;
  if (p >= 1) return 1.0;
  double term = std::pow(1 - p, n);  // P[X = 0]
  const double odds = p / (1 - p);
  for (int j = 0; j <= r; ++j) term *= odds * (n - j) / (j + 1);  // -> P[X = r+1]
  double above = 0;
  for (int j = r + 1; j <= n; ++j) {
    above += term;
    term *= odds * (n - j) / (j + 1);
  }
  return std::min(1.0, above);
}

}  // namespace

double frame_loss_probability(int data_packets, double redundancy_ratio, const LossModel& model,
                              LossMethod method, long trials, std::uint64_t seed) {
  if (data_packets < 1) throw ValidationError("frame_loss: data_packets must be at least 1");
  model.validate();
  const int r = parity_for_ratio(data_packets, redundancy_ratio);
  const int n = data_packets + r;

  if (method == LossMethod::analytic) {
    if (model.kind != LossKind::bernoulli)
      throw UnsupportedModel("frame_loss: analytic form only for the bernoulli model");
    return binomial_tail_above(n, r, model.loss_rate);
  }

  if (trials < 1) throw ValidationError("frame_loss: trials must be at least 1");
  long bad = 0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const bool ge = model.kind == LossKind::gilbert_elliott;
  const double pi_bad =
      ge && model.p_good_to_bad > 0
          ? model.p_good_to_bad / (model.p_good_to_bad + model.p_bad_to_good)
          : 0.0;
  for (long t = 0; t < trials; ++t) {
    // Fresh channel per frame, started from the stationary state mix.
    bool in_bad = ge && unif(rng) < pi_bad;
    int losses = 0;
    for (int i = 0; i < n; ++i) {
      if (ge) {
        if (unif(rng) < (in_bad ? model.loss_in_bad : model.loss_in_good)) ++losses;
        if (in_bad) {
          if (unif(rng) < model.p_bad_to_good) in_bad = false;
        } else {
          if (unif(rng) < model.p_good_to_bad) in_bad = true;
        }
      } else if (unif(rng) < model.loss_rate) {
        ++losses;
      }
    }
    if (losses > r) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(trials);
}

std::optional<double> min_redundancy_for_target(int data_packets, const LossModel& model,
                                                double target_frame_loss,
                                                std::span<const double> ratio_grid,
                                                LossMethod method, long trials,
                                                std::uint64_t seed) {
  if (ratio_grid.empty()) throw ValidationError("min_redundancy: empty ratio grid");
  if (!(target_frame_loss > 0)) throw ValidationError("min_redundancy: target must be positive");
  for (std::size_t i = 0; i < ratio_grid.size(); ++i) {
    if (ratio_grid[i] < 0) throw ValidationError("min_redundancy: ratios must be non-negative");
    if (i > 0 && !(ratio_grid[i] > ratio_grid[i - 1]))
      throw ValidationError("min_redundancy: ratio grid must be strictly ascending");
  }
  for (std::size_t i = 0; i < ratio_grid.size(); ++i) {
    const double p = frame_loss_probability(data_packets, ratio_grid[i], model, method, trials,
                                            detail::mix_seed(seed, "ratio-" + std::to_string(i)));
    if (p <= target_frame_loss) return ratio_grid[i];
  }
  return std::nullopt;
}

}  // namespace easim
