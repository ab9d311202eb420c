#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "easim/errors.hpp"

namespace easim {

enum class Resolution { p240, p360, p480, p720, p1080 };

const char* to_string(Resolution r);
Resolution resolution_from_string(const std::string& s);  // "240" / "240p" / "p240"

/// One encoding of the content: a bitrate and the resolution it is encoded at.
struct Rung {
  double bitrate_kbps = 0;
  Resolution resolution = Resolution::p240;
};

/// The encoding ladder plus the chunking geometry shared by every module.
struct LadderSpec {
  std::vector<Rung> rungs;       // ascending bitrate
  double chunk_duration_s = 4.0;
  double fps = 30.0;
  int gop_frames = 120;          // frames per chunk; must equal chunk_duration * fps

  static LadderSpec default_ladder();

  void validate() const;  // throws ValidationError
  double min_bitrate_kbps() const { return rungs.front().bitrate_kbps; }
  double max_bitrate_kbps() const { return rungs.back().bitrate_kbps; }
  double mid_bitrate_kbps() const;  // midpoint of the bitrate span
  double frame_interval_s() const { return 1.0 / fps; }
  const Rung& rung_for_bitrate(double bitrate_kbps) const;  // exact match or OutOfRange
};

/// Piecewise-linear quality maps calibrated offline:
///   base_psnr      (bitrate_kbps -> dB), strictly increasing in both columns
///   sr_gain_db     additive dB per input resolution when upscaled client-side
///   recovery_psnr  (consecutive substituted frames -> dB), non-increasing
///   reuse_psnr     same shape, for naive previous-frame reuse; dominated by recovery
struct QualityModel {
  std::vector<std::pair<double, double>> base_psnr;
  std::map<Resolution, double> sr_gain_db;
  std::vector<std::pair<double, double>> recovery_psnr;
  std::vector<std::pair<double, double>> reuse_psnr;

  static QualityModel default_model();
  static QualityModel from_json_text(const std::string& text);
  static QualityModel load(const std::filesystem::path& path);
  std::string to_json_text() const;

  void validate() const;
};

enum class Enhancement { none, sr };
enum class RecoveryMode { recovery, reuse };

/// PSNR delivered at `bitrate_kbps`, optionally after client-side upscaling of
/// the given input resolution. Interpolates between anchors; querying outside
/// the anchored bitrate span throws OutOfRange.
double psnr_at(const QualityModel& q, double bitrate_kbps, Enhancement enh, Resolution res);

/// PSNR of the `consecutive`-th substituted frame in a run (1-based), under
/// frame recovery or plain previous-frame reuse. Clamps outside the anchor
/// span; consecutive < 1 throws ValidationError.
double recovered_psnr(const QualityModel& q, double consecutive, RecoveryMode mode);

/// Inverse of the base curve: the bitrate whose encode would deliver
/// `psnr_db`. Above the top anchor clamps to the top bitrate (quality
/// saturates); below the bottom anchor throws OutOfRange.
double effective_bitrate(const QualityModel& q, double psnr_db);

/// Total variant of the inverse used inside QoE scoring: below the bottom
/// anchor it extends the bottom segment's slope and floors at 0 kbps, so a
/// badly degraded chunk scores low instead of throwing.
double effective_bitrate_total(const QualityModel& q, double psnr_db);

/// Client-side enhancement latency model.
struct EnhancementCost {
  double t_sr_s = 0.022;  // super-resolution inference per frame
  double t_rc_s = 0.022;  // recovery synthesis per frame (shared architecture)
  std::map<Resolution, double> decode_time_s;
  bool decode_latency_in_sr_gate = true;  // charge decode before the SR deadline check

  static EnhancementCost default_cost();
  void validate() const;
  double decode_s(Resolution res) const;
};

}  // namespace easim
