#include "easim/quality.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "util.hpp"

namespace easim {

using detail::Extrapolate;
using nlohmann::json;

const char* to_string(Resolution r) {
  switch (r) {
    case Resolution::p240: return "240";
    case Resolution::p360: return "360";
    case Resolution::p480: return "480";
    case Resolution::p720: return "720";
    case Resolution::p1080: return "1080";
  }
  throw ValidationError("unknown resolution");
}

Resolution resolution_from_string(const std::string& s) {
  std::string t = s;
  if (!t.empty() && (t.front() == 'p' || t.front() == 'P')) t.erase(t.begin());
  if (!t.empty() && (t.back() == 'p' || t.back() == 'P')) t.pop_back();
  if (t == "240") return Resolution::p240;
  if (t == "360") return Resolution::p360;
  if (t == "480") return Resolution::p480;
  if (t == "720") return Resolution::p720;
  if (t == "1080") return Resolution::p1080;
  throw ParseError("unknown resolution \"" + s + "\"");
}

LadderSpec LadderSpec::default_ladder() {
  LadderSpec l;
  l.rungs = {{512, Resolution::p240},
             {1024, Resolution::p360},
             {1600, Resolution::p480},
             {2640, Resolution::p720},
             {4400, Resolution::p1080}};
  return l;
}

void LadderSpec::validate() const {
  if (rungs.empty()) throw ValidationError("ladder: no rungs");
  for (std::size_t i = 0; i < rungs.size(); ++i) {
    if (!(rungs[i].bitrate_kbps > 0)) throw ValidationError("ladder: bitrates must be positive");
    if (i > 0 && !(rungs[i].bitrate_kbps > rungs[i - 1].bitrate_kbps))
      throw ValidationError("ladder: bitrates must be strictly ascending");
  }
  if (!(chunk_duration_s > 0)) throw ValidationError("ladder: chunk duration must be positive");
  if (!(fps > 0)) throw ValidationError("ladder: fps must be positive");
  if (gop_frames < 1) throw ValidationError("ladder: gop_frames must be at least 1");
  if (std::abs(gop_frames - chunk_duration_s * fps) > 1e-9)
    throw ValidationError("ladder: gop_frames must equal chunk_duration * fps");
}

double LadderSpec::mid_bitrate_kbps() const {
  return 0.5 * (min_bitrate_kbps() + max_bitrate_kbps());
}

const Rung& LadderSpec::rung_for_bitrate(double bitrate_kbps) const {
  for (const auto& r : rungs) {
    if (std::abs(r.bitrate_kbps - bitrate_kbps) <= 1e-9 * std::max(1.0, r.bitrate_kbps)) return r;
  }
  throw OutOfRange("ladder: no rung at " + detail::fmt(bitrate_kbps) + " kbps");
}

QualityModel QualityModel::default_model() {
  QualityModel q;
  q.base_psnr = {{512, 32.0}, {1024, 35.0}, {1600, 37.0}, {2640, 39.5}, {4400, 41.5}};
  q.sr_gain_db = {{Resolution::p240, 1.2},
                  {Resolution::p360, 1.1},
                  {Resolution::p480, 1.0},
                  {Resolution::p720, 1.3},
                  {Resolution::p1080, 0.0}};
  q.recovery_psnr = {{1, 38.5}, {5, 36.0}, {10, 33.0}, {20, 30.0}, {50, 27.0}};
  q.reuse_psnr = {{1, 27.0}, {5, 22.0}, {10, 19.0}, {20, 16.0}, {50, 12.0}};
  return q;
}

void QualityModel::validate() const {
  if (base_psnr.size() < 2) throw ValidationError("quality: base_psnr needs at least 2 anchors");
  for (std::size_t i = 0; i < base_psnr.size(); ++i) {
    if (!(base_psnr[i].first > 0)) throw ValidationError("quality: base_psnr bitrates must be positive");
    if (i > 0 && !(base_psnr[i].first > base_psnr[i - 1].first &&
                   base_psnr[i].second > base_psnr[i - 1].second))
      throw ValidationError("quality: base_psnr must be strictly increasing in both columns");
  }
  for (const auto& [res, gain] : sr_gain_db) {
    (void)res;
    if (!(gain >= 0) || !std::isfinite(gain))
      throw ValidationError("quality: sr gains must be finite and non-negative");
  }
  auto check_runs = [](const std::vector<std::pair<double, double>>& a, const char* name) {
    if (a.empty()) throw ValidationError(std::string("quality: ") + name + " needs anchors");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(a[i].first >= 1)) throw ValidationError(std::string("quality: ") + name +
                                                    " counts start at 1");
      if (i > 0 && !(a[i].first > a[i - 1].first))
        throw ValidationError(std::string("quality: ") + name + " counts must be ascending");
      if (i > 0 && a[i].second > a[i - 1].second)
        throw ValidationError(std::string("quality: ") + name + " must be non-increasing in dB");
    }
  };
  check_runs(recovery_psnr, "recovery_psnr");
  check_runs(reuse_psnr, "reuse_psnr");
}

double psnr_at(const QualityModel& q, double bitrate_kbps, Enhancement enh, Resolution res) {
  double psnr = detail::interp(q.base_psnr, bitrate_kbps, Extrapolate::forbid, Extrapolate::forbid,
                               "psnr_at(bitrate)");
  if (enh == Enhancement::sr) {
    auto it = q.sr_gain_db.find(res);
    if (it != q.sr_gain_db.end()) psnr += it->second;
  }
  return psnr;
}

double recovered_psnr(const QualityModel& q, double consecutive, RecoveryMode mode) {
  if (!(consecutive >= 1)) throw ValidationError("recovered_psnr: run position starts at 1");
  const auto& map = mode == RecoveryMode::recovery ? q.recovery_psnr : q.reuse_psnr;
  return detail::interp(map, consecutive, Extrapolate::clamp, Extrapolate::clamp, "recovered_psnr");
}

double effective_bitrate(const QualityModel& q, double psnr_db) {
  // Quality saturates above the top anchor; below the bottom there is no
  // encode that poor, so the query is a caller error.
  return detail::interp_inverse(q.base_psnr, psnr_db, Extrapolate::forbid, Extrapolate::clamp,
                                "effective_bitrate");
}

double effective_bitrate_total(const QualityModel& q, double psnr_db) {
  if (psnr_db >= q.base_psnr.front().second) {
    return detail::interp_inverse(q.base_psnr, psnr_db, Extrapolate::forbid, Extrapolate::clamp,
                                  "effective_bitrate");
  }
  const auto& [b0, p0] = q.base_psnr[0];
  const auto& [b1, p1] = q.base_psnr[1];
  const double slope = (b1 - b0) / (p1 - p0);  // kbps per dB
  return std::max(0.0, b0 - (p0 - psnr_db) * slope);
}

EnhancementCost EnhancementCost::default_cost() {
  EnhancementCost c;
  c.decode_time_s = {{Resolution::p240, 0.0018},
                     {Resolution::p360, 0.0023},
                     {Resolution::p480, 0.0029},
                     {Resolution::p720, 0.0041},
                     {Resolution::p1080, 0.0062}};
  return c;
}

void EnhancementCost::validate() const {
  if (!(t_sr_s > 0) || !(t_rc_s > 0))
    throw ValidationError("cost: enhancement latencies must be positive");
  for (const auto& [res, t] : decode_time_s) {
    (void)res;
    if (!(t > 0)) throw ValidationError("cost: decode times must be positive");
  }
}

double EnhancementCost::decode_s(Resolution res) const {
  auto it = decode_time_s.find(res);
  return it == decode_time_s.end() ? 0.0 : it->second;
}

namespace {

json anchors_to_json(const std::vector<std::pair<double, double>>& a) {
  json arr = json::array();
  for (const auto& [x, y] : a) arr.push_back(json::array({x, y}));
  return arr;
}

}  // namespace

QualityModel QualityModel::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("quality model: ") + e.what());
  }
  detail::require_keys<ParseError>(j, {"base_psnr", "sr_gain", "recovery_psnr", "reuse_psnr"},
                                   "quality model");
  QualityModel q;
  if (!j.contains("base_psnr")) throw ParseError("quality model: missing key \"base_psnr\"");
  q.base_psnr = detail::get_anchor_list(j.at("base_psnr"), "quality model base_psnr");
  if (j.contains("sr_gain")) {
    const auto& g = j.at("sr_gain");
    if (!g.is_object()) throw ParseError("quality model: sr_gain must be an object");
    q.sr_gain_db.clear();
    for (const auto& [key, value] : g.items()) {
      if (!value.is_number()) throw ParseError("quality model: sr_gain values must be numbers");
      q.sr_gain_db[resolution_from_string(key)] = value.get<double>();
    }
  }
  if (!j.contains("recovery_psnr")) throw ParseError("quality model: missing key \"recovery_psnr\"");
  q.recovery_psnr = detail::get_anchor_list(j.at("recovery_psnr"), "quality model recovery_psnr");
  if (!j.contains("reuse_psnr")) throw ParseError("quality model: missing key \"reuse_psnr\"");
  q.reuse_psnr = detail::get_anchor_list(j.at("reuse_psnr"), "quality model reuse_psnr");
  q.validate();
  return q;
}

QualityModel QualityModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("quality model: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string QualityModel::to_json_text() const {
  json j;
  j["base_psnr"] = anchors_to_json(base_psnr);
  json gains = json::object();
  for (const auto& [res, g] : sr_gain_db) gains[to_string(res)] = g;
  j["sr_gain"] = gains;
  j["recovery_psnr"] = anchors_to_json(recovery_psnr);
  j["reuse_psnr"] = anchors_to_json(reuse_psnr);
  return j.dump(2) + "\n";
}

}  // namespace easim
