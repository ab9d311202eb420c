#pragma once

// Internal helpers shared by the library sources. Not installed.

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "easim/errors.hpp"

namespace easim::detail {

/// Piecewise-linear y(x) over ascending (x, y) anchors. Behavior outside the
/// anchor span is chosen by the caller.
enum class Extrapolate { forbid, clamp, extend };

double interp(std::span<const std::pair<double, double>> anchors, double x, Extrapolate below,
              Extrapolate above, const char* what);

/// Inverse lookup x(y) for anchors whose y column is strictly monotonic.
double interp_inverse(std::span<const std::pair<double, double>> anchors, double y,
                      Extrapolate below, Extrapolate above, const char* what);

/// FNV-1a, for deriving independent deterministic seeds from labels.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis = 1469598103934665603ull);
std::uint64_t mix_seed(std::uint64_t seed, std::string_view label);

/// Fixed decimal formatting used in CSV output: trims trailing zeros, never
/// emits locale-dependent separators or exponents for the value ranges here.
std::string fmt(double v, int decimals = 6);

/// Reject JSON objects carrying keys outside `allowed`; the message names the
/// offending key and where it sat. The exception type says what kind of input
/// went bad: ConfigError for configuration, ParseError for data files.
template <class E = ConfigError>
void require_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                  const std::string& context) {
  if (!obj.is_object()) throw E(context + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (key == k) { ok = true; break; }
    if (!ok) throw E(context + ": unknown key \"" + key + "\"");
  }
}

/// obj[key] with a ParseError naming the key when absent or of the wrong type.
double get_number(const nlohmann::json& obj, const char* key, const std::string& context);

std::vector<std::pair<double, double>> get_anchor_list(const nlohmann::json& arr,
                                                       const std::string& context);

}  // namespace easim::detail
