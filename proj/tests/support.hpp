#pragma once
// Shared test helpers: an independent exact probability oracle for the
// two-state loss chain, an exact binomial tail, and a temp-dir guard.
// Everything here is deliberately reimplemented from first principles so the
// tests do not inherit bugs from the library under test.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "easim/fec.hpp"

namespace testsup {

/// P[more than r of n_data + r packets lost] for a two-state chain, by exact
/// dynamic programming over (packet, chain state, losses so far). The chain
/// samples loss from the current state, then transitions; the initial state
/// is drawn from the stationary distribution — the same order of operations
/// the library's sampler documents.
inline double ge_frame_loss_exact(int n_data, double ratio, const easim::LossModel& m) {
  const int r = static_cast<int>(std::ceil(ratio * n_data - 1e-9));
  const int total = n_data + r;
  const double g2b = m.p_good_to_bad;
  const double b2g = m.p_bad_to_good;
  const double pi_bad = (g2b + b2g) > 0 ? g2b / (g2b + b2g) : 0.0;

  // dp[state][lost], state 0 = good, 1 = bad
  std::vector<std::vector<double>> dp(2, std::vector<double>(total + 1, 0.0));
  dp[0][0] = 1.0 - pi_bad;
  dp[1][0] = pi_bad;
  for (int pkt = 0; pkt < total; ++pkt) {
    std::vector<std::vector<double>> next(2, std::vector<double>(total + 1, 0.0));
    for (int s = 0; s < 2; ++s) {
      const double p_loss = s == 1 ? m.loss_in_bad : m.loss_in_good;
      const double stay = s == 1 ? 1.0 - b2g : 1.0 - g2b;
      const double move = s == 1 ? b2g : g2b;
      const int other = 1 - s;
      for (int lost = 0; lost <= pkt; ++lost) {
        const double mass = dp[s][lost];
        if (mass == 0.0) continue;
        next[s][lost + 1] += mass * p_loss * stay;
        next[s][lost] += mass * (1.0 - p_loss) * stay;
        next[other][lost + 1] += mass * p_loss * move;
        next[other][lost] += mass * (1.0 - p_loss) * move;
      }
    }
    dp = std::move(next);
  }
  double tail = 0;
  for (int s = 0; s < 2; ++s)
    for (int lost = r + 1; lost <= total; ++lost) tail += dp[s][lost];
  return tail;
}

/// P[Binomial(n, p) > r] by direct term summation.
inline double binomial_tail_exact(int n, double p, int r) {
  if (r >= n) return 0.0;
  double tail = 0;
  for (int j = r + 1; j <= n; ++j) {
    double log_term = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
                      j * std::log(p) + (n - j) * std::log1p(-p);
    tail += std::exp(log_term);
  }
  return tail;
}

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "easim-test") {
    std::random_device rd;
    std::mt19937_64 rng(rd());
    dir_ = std::filesystem::temp_directory_path() /
           (tag + "-" + std::to_string(rng() % 1000000000));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Directory the bundled data files live in (set by CTest; falls back to the
/// in-repo location for manual runs).
inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("EASIM_DATA"); env != nullptr && *env != '\0') return env;
  return std::filesystem::path("data");
}

}  // namespace testsup
