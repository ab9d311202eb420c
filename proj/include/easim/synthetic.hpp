#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "easim/traces.hpp"

namespace easim {

/// Generator knobs for one network family. Throughput follows a mean-reverting
/// random walk in log space with occasional multi-second deep fades; loss
/// jitters around its mean. Defaults per family are calibrated to the
/// bundled measurement statistics (mean throughput / mean loss):
///   3g 7.5 Mbps / 0.9%, 4g 21.6 / 1.3%, 5g 36.4 / 1.6%, wifi 82.3 / 0.5%.
struct SyntheticParams {
  NetworkKind kind = NetworkKind::synthetic;
  double mean_throughput_kbps = 10000;
  double mean_loss_rate = 0.01;
  double log_sigma = 0.3;        // per-step volatility in log space
  double reversion = 0.12;       // pull toward the mean per step
  double fade_prob = 0.01;       // chance per step to enter a deep fade
  double fade_depth = 0.2;       // multiplier during a fade
  double fade_len_s = 4.0;       // mean fade duration
  double loss_jitter = 0.5;      // relative sd of the loss column
  double sample_interval_s = 1.0;

  static SyntheticParams for_kind(NetworkKind kind);
};

/// Deterministic in (params, duration, seed).
NetworkTrace synthesize_trace(const SyntheticParams& params, double duration_s,
                              std::uint64_t seed);

NetworkTrace synthesize_trace(NetworkKind kind, double duration_s, std::uint64_t seed,
                              std::optional<double> loss_override = std::nullopt);

/// `per_kind` traces for each of {3g, 4g, 5g, wifi}, ids like "4g-02".
/// Seeds derive from `seed` per trace, so the suite is reproducible and
/// individual traces are independent of `per_kind`.
std::vector<NetworkTrace> synthetic_suite(int per_kind, double duration_s, std::uint64_t seed,
                                          std::optional<double> loss_override = std::nullopt);

}  // namespace easim
