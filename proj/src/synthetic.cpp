#include "easim/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "util.hpp"

namespace easim {

SyntheticParams SyntheticParams::for_kind(NetworkKind kind) {
  SyntheticParams p;
  p.kind = kind;
  switch (kind) {
    case NetworkKind::net3g:
      p.mean_throughput_kbps = 7500;
      p.mean_loss_rate = 0.009;
      p.log_sigma = 0.28;
      p.fade_prob = 0.015;
      break;
    case NetworkKind::net4g:
      p.mean_throughput_kbps = 21600;
      p.mean_loss_rate = 0.013;
      p.log_sigma = 0.35;
      p.fade_prob = 0.012;
      break;
    case NetworkKind::net5g:
      // mmWave-style: highest mean, largest swings.
      p.mean_throughput_kbps = 36400;
      p.mean_loss_rate = 0.016;
      p.log_sigma = 0.55;
      p.fade_prob = 0.02;
      p.fade_depth = 0.12;
      break;
    case NetworkKind::wifi:
      p.mean_throughput_kbps = 82300;
      p.mean_loss_rate = 0.005;
      p.log_sigma = 0.25;
      p.fade_prob = 0.008;
      break;
    case NetworkKind::synthetic:
      break;
  }
  return p;
}

NetworkTrace synthesize_trace(const SyntheticParams& params, double duration_s,
                              std::uint64_t seed) {
  if (!(duration_s > 0)) throw ValidationError("synthesize: duration must be positive");
  if (!(params.sample_interval_s > 0))
    throw ValidationError("synthesize: sample interval must be positive");
  if (!(params.mean_throughput_kbps > 0))
    throw ValidationError("synthesize: mean throughput must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int n = static_cast<int>(std::floor(duration_s / params.sample_interval_s)) + 1;
  NetworkTrace t;
  t.kind = params.kind;
  t.samples.reserve(n);

  // AR(1) in log space around mu; mu is set so E[exp(x)] hits the target mean
  // (lognormal correction by the stationary variance).
  const double phi = 1 - params.reversion;
  const double stat_sd = params.log_sigma / std::sqrt(std::max(1e-9, 1 - phi * phi));
  const double mu = std::log(params.mean_throughput_kbps) - 0.5 * stat_sd * stat_sd;
  double x = mu + stat_sd * gauss(rng);
  int fade_left = 0;

  for (int i = 0; i < n; ++i) {
    x = mu + phi * (x - mu) + params.log_sigma * gauss(rng);
    if (fade_left > 0) {
      --fade_left;
    } else if (unif(rng) < params.fade_prob) {
      fade_left = std::max(1, static_cast<int>(std::round(
                                  -params.fade_len_s / params.sample_interval_s * std::log(unif(rng)))));
    }
    double tput = std::exp(x);
    if (fade_left > 0) tput *= params.fade_depth;

    double loss = params.mean_loss_rate * (1.0 + params.loss_jitter * gauss(rng));
    if (fade_left > 0) loss *= 2.0;  // fades come with congestion loss
    loss = std::clamp(loss, 0.0, 0.25);

    t.samples.push_back({i * params.sample_interval_s, tput, loss});
  }
  t.id = std::string(to_string(params.kind)) + "-" + std::to_string(seed & 0xffff);
  t.validate();
  return t;
}

NetworkTrace synthesize_trace(NetworkKind kind, double duration_s, std::uint64_t seed,
                              std::optional<double> loss_override) {
  SyntheticParams p = SyntheticParams::for_kind(kind);
  NetworkTrace t = synthesize_trace(p, duration_s, seed);
  if (loss_override) {
    if (*loss_override < 0 || *loss_override > 1)
      throw ValidationError("synthesize: loss override outside [0, 1]");
    for (auto& s : t.samples) s.loss_rate = *loss_override;
  }
  return t;
}

std::vector<NetworkTrace> synthetic_suite(int per_kind, double duration_s, std::uint64_t seed,
                                          std::optional<double> loss_override) {
  if (per_kind < 1) throw ValidationError("synthetic_suite: per_kind must be at least 1");
  std::vector<NetworkTrace> out;
  const NetworkKind kinds[] = {NetworkKind::net3g, NetworkKind::net4g, NetworkKind::net5g,
                               NetworkKind::wifi};
  for (NetworkKind k : kinds) {
    for (int i = 0; i < per_kind; ++i) {
      const std::string label = std::string(to_string(k)) + "-" + std::to_string(i + 1);
      NetworkTrace t = synthesize_trace(k, duration_s, detail::mix_seed(seed, label), loss_override);
      char idbuf[32];
      std::snprintf(idbuf, sizeof idbuf, "%s-%02d", to_string(k), i + 1);
      t.id = idbuf;
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace easim
