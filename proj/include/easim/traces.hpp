#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "easim/errors.hpp"
#include "easim/quality.hpp"

namespace easim {

enum class NetworkKind { net3g, net4g, net5g, wifi, synthetic };

const char* to_string(NetworkKind k);
NetworkKind network_kind_from_string(const std::string& s);

/// One measurement: link throughput and packet loss rate at a point in time.
/// Both hold piecewise-constant until the next sample.
struct TraceSample {
  double timestamp_s = 0;
  double throughput_kbps = 0;
  double loss_rate = 0;
};

struct NetworkTrace {
  std::string id;
  NetworkKind kind = NetworkKind::synthetic;
  std::vector<TraceSample> samples;

  void validate() const;  // throws ValidationError / DegenerateTrace

  double start_s() const { return samples.front().timestamp_s; }
  double end_s() const { return samples.back().timestamp_s; }
  double duration_s() const { return end_s() - start_s(); }
  double mean_throughput_kbps() const;
  double mean_loss_rate() const;

  /// Value in force at absolute time t (piecewise-constant). t outside
  /// [start, end] throws OutOfRange.
  double throughput_at(double t) const;
  double loss_rate_at(double t) const;
};

enum class TraceFormat { csv, json, infer };

/// Load one trace. CSV rows are `timestamp_s,throughput_kbps,loss_rate` with
/// an optional header; JSON carries the same samples plus optional id/kind.
/// `infer` picks by file extension. Malformed content throws ParseError with
/// the offending line; a loaded trace is always validated.
NetworkTrace load_trace(const std::filesystem::path& path, TraceFormat format = TraceFormat::infer);

std::string trace_to_csv(const NetworkTrace& trace);
void save_trace_csv(const NetworkTrace& trace, const std::filesystem::path& path);

/// Every trace file (by extension) directly inside `dir`, sorted by filename.
std::vector<NetworkTrace> load_trace_dir(const std::filesystem::path& dir);

/// Scale the throughput column so its mean lands on `target_mean_kbps`
/// (default: the midpoint of the ladder's bitrate span, so rate selection has
/// real choices to make). Timestamps and loss rates are untouched.
NetworkTrace downscale_trace(const NetworkTrace& trace, const LadderSpec& ladder,
                             std::optional<double> target_mean_kbps = std::nullopt);

enum class PredictorKind { ewma, holt_winters };

/// Online one-step-ahead forecaster over a scalar series. Pure value type:
/// `predict_next` returns the advanced state, it never mutates in place.
struct Predictor {
  PredictorKind kind = PredictorKind::ewma;
  double ewma_alpha = 0.3;
  double hw_level_alpha = 0.5;
  double hw_trend_beta = 0.1;

  bool initialized = false;
  int observations = 0;
  double level = 0;
  double trend = 0;

  static Predictor ewma(double alpha = 0.3);
  static Predictor holt_winters(double level_alpha = 0.5, double trend_beta = 0.1);

  /// Forecast for the next step. Throws NotInitialized before any observation.
  double prediction() const;
};

/// Fold one observation into the state; returns the new state and its
/// one-step-ahead prediction. The first observation initializes level (and
/// leaves trend at zero), so the first prediction is the observation itself.
std::pair<Predictor, double> predict_next(const Predictor& state, double observation);

/// Non-negative forecast for quantities that cannot go below zero
/// (throughput, loss rate): Holt-Winters trend can otherwise cross zero.
double predict_clamped(const Predictor& state, double lo, double hi);

}  // namespace easim
