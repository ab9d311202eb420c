#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "easim/errors.hpp"

namespace easim {

/// Systematic maximum-distance-separable erasure code over GF(2^8): k data
/// shards, r parity shards, any k of the k+r reconstruct the payload.
struct FecConfig {
  int data_shards = 0;
  int parity_shards = 0;
  int shard_size = 0;  // bytes per shard

  // Throws ValidationError on bad counts/sizes; ConfigError when k + r
  // exceeds 255, the hard bound of the byte-field code.
  void validate() const;
  int total_shards() const { return data_shards + parity_shards; }
  double redundancy_ratio() const;
};

using Shard = std::vector<std::uint8_t>;

/// Split + pad `payload` into k data shards and append r parity shards.
/// Result holds k+r shards of shard_size bytes; the first k are the payload
/// (zero-padded). Payloads longer than k * shard_size throw ValidationError.
std::vector<Shard> fec_encode(const FecConfig& cfg, std::span<const std::uint8_t> payload);

/// Reconstruct the padded payload (k * shard_size bytes) from the surviving
/// shards, indexed by position: `shards[i]` is shard i or nullopt if lost.
/// Fewer than k survivors throw DecodeError; a wrong-sized survivor or a
/// vector not of length k+r throws ValidationError.
std::vector<std::uint8_t> fec_decode(const FecConfig& cfg,
                                     const std::vector<std::optional<Shard>>& shards);

/// A surviving shard tagged with its position in the encoded block.
struct IndexedShard {
  int index = 0;
  Shard bytes;
};

/// Same reconstruction from an explicit survivor list. Duplicate or
/// out-of-range indices throw ValidationError.
std::vector<std::uint8_t> fec_decode(const FecConfig& cfg, const std::vector<IndexedShard>& shards);

/// Parity shard count for a redundancy ratio: ceil(ratio * k).
int parity_for_ratio(int data_shards, double ratio);

enum class LossKind { bernoulli, gilbert_elliott };

/// Packet-level loss channel. Bernoulli drops each packet independently;
/// Gilbert-Elliott alternates good/bad states with per-state drop
/// probabilities, producing loss bursts at the same long-run rate.
struct LossModel {
  LossKind kind = LossKind::bernoulli;
  double loss_rate = 0.01;       // bernoulli drop probability
  double p_good_to_bad = 0;      // GE transitions
  double p_bad_to_good = 0.25;
  double loss_in_bad = 0.25;     // GE drop probability per state
  double loss_in_good = 0;

  static LossModel bernoulli(double loss_rate);
  /// GE model with the given stationary loss, mean burst length (1/p_bad_to_good)
  /// and bad-state drop probability. loss_in_good stays 0.
  static LossModel bursty(double stationary_loss, double mean_burst_len = 4.0,
                          double loss_in_bad = 0.25);

  void validate() const;
  double stationary_loss() const;
  /// Same burst structure, re-aimed at a different long-run loss rate.
  LossModel with_stationary_loss(double stationary_loss) const;
};

/// Stateful sampler for a LossModel; the GE chain persists across packets and
/// across retune calls, so consecutive frames see correlated loss.
class LossProcess {
 public:
  LossProcess(const LossModel& model, std::uint64_t seed);

  bool next_lost();  // one packet
  /// Re-aim the long-run loss rate without resetting the chain state.
  void set_stationary_loss(double stationary_loss);
  const LossModel& model() const { return model_; }

 private:
  LossModel model_;
  std::mt19937_64 rng_;
  bool in_bad_ = false;
  double uniform();
};

enum class LossMethod { analytic, monte_carlo };

/// Probability that a frame of `data_packets` packets protected at
/// `redundancy_ratio` is unrecoverable, i.e. that more than
/// ceil(ratio * data_packets) of its data+parity packets are lost.
/// `analytic` evaluates the exact tail and is only defined for bernoulli
/// (UnsupportedModel otherwise); `monte_carlo` samples `trials` frames with a
/// fresh chain per frame, deterministic in `seed`.
double frame_loss_probability(int data_packets, double redundancy_ratio, const LossModel& model,
                              LossMethod method, long trials = 100000, std::uint64_t seed = 1);

/// Smallest ratio on `grid` whose frame loss probability meets `target`,
/// or nullopt if none does. Grid values are tried in ascending order.
std::optional<double> min_redundancy_for_target(int data_packets, const LossModel& model,
                                                double target_frame_loss,
                                                std::span<const double> ratio_grid,
                                                LossMethod method = LossMethod::monte_carlo,
                                                long trials = 100000, std::uint64_t seed = 1);

}  // namespace easim
