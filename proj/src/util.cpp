#include "util.hpp"

#include <cmath>

namespace easim::detail {

double interp(std::span<const std::pair<double, double>> a, double x, Extrapolate below,
              Extrapolate above, const char* what) {
  if (a.empty()) throw ValidationError(std::string(what) + ": no anchors");
  if (x < a.front().first) {
    switch (below) {
      case Extrapolate::clamp: return a.front().second;
      case Extrapolate::extend: break;
      case Extrapolate::forbid:
        throw OutOfRange(std::string(what) + ": " + fmt(x) + " below anchored range");
    }
  }
  if (x > a.back().first) {
    switch (above) {
      case Extrapolate::clamp: return a.back().second;
      case Extrapolate::extend: break;
      case Extrapolate::forbid:
        throw OutOfRange(std::string(what) + ": " + fmt(x) + " above anchored range");
    }
  }
  if (a.size() == 1) return a.front().second;
  std::size_t hi = 1;
  while (hi + 1 < a.size() && a[hi].first < x) ++hi;
  const auto& [x0, y0] = a[hi - 1];
  const auto& [x1, y1] = a[hi];
  const double t = (x - x0) / (x1 - x0);
  return y0 + t * (y1 - y0);
}

double interp_inverse(std::span<const std::pair<double, double>> a, double y, Extrapolate below,
                      Extrapolate above, const char* what) {
  // Swap columns; anchors are (x, y) with y strictly increasing for our maps.
  std::vector<std::pair<double, double>> inv(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) inv[i] = {a[i].second, a[i].first};
  return interp(inv, y, below, above, what);
}

std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view label) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "#%llu#", static_cast<unsigned long long>(seed));
  return fnv1a64(label, fnv1a64(buf));
}

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

double get_number(const nlohmann::json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key)) throw ParseError(context + ": missing key \"" + key + "\"");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(context + ": key \"" + key + "\" is not a number");
  return v.get<double>();
}

std::vector<std::pair<double, double>> get_anchor_list(const nlohmann::json& arr,
                                                       const std::string& context) {
  if (!arr.is_array()) throw ParseError(context + ": expected an array of [x, y] pairs");
  std::vector<std::pair<double, double>> out;
  out.reserve(arr.size());
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ParseError(context + ": each anchor must be a [number, number] pair");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

}  // namespace easim::detail
