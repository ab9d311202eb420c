#pragma once

#include <string>
#include <vector>

#include "easim/errors.hpp"
#include "easim/quality.hpp"

namespace easim {

/// Download/playout geometry of one chunk: frames play at a fixed cadence
/// starting one interval after the previous chunk's playout ended, and arrive
/// back-to-back at the (predicted) link throughput. Frames are 1-indexed:
/// frame i plays at t_prev + i * delta.
struct ChunkTiming {
  double t_prev_s = 0;    // playout time of the previous chunk's last frame
  double delta_s = 0;     // frame interval (1 / fps)
  double throughput_kbps = 0;
  std::vector<double> frame_bytes;  // per-frame wire size, in order

  /// Uniform split of `total_bytes` over `n_frames`.
  static ChunkTiming uniform(double t_prev_s, double delta_s, double total_bytes, int n_frames,
                             double throughput_kbps);

  void validate() const;  // throws ValidationError / ZeroThroughput
  int frame_count() const { return static_cast<int>(frame_bytes.size()); }
};

/// When frame i (1-based) is due to play: t_prev + i * delta.
double expected_play_time(const ChunkTiming& chunk, int frame_index);

/// When frame i (1-based) finishes arriving: t_prev + cumulative bytes of
/// frames 1..i over the throughput. Frames share the link in order, so
/// arrivals are cumulative.
double expected_arrival_time(const ChunkTiming& chunk, int frame_index);

enum class FrameKind { needs_recovery, sr_eligible, received_no_sr };

const char* to_string(FrameKind k);

struct FrameClass {
  int index = 0;  // 1-based frame number within the chunk
  double t_play_s = 0;
  double t_arr_s = 0;
  FrameKind kind = FrameKind::received_no_sr;
};

/// Expected composition of a chunk before it is fetched.
struct ClassifiedChunk {
  std::vector<FrameClass> frames;
  int late_count = 0;         // arrive after their play time
  int sr_eligible_count = 0;  // on time with slack for upscaling
  int plain_count = 0;        // on time, no slack

  // Expected counts once random loss is layered on top of timing:
  // late frames need recovery regardless, and a `loss` fraction of the
  // on-time frames is lost in flight; SR only applies to frames that arrive.
  double expected_recovered = 0;
  double expected_sr = 0;
  double expected_plain = 0;
};

/// Classify every frame of the chunk by timing: a frame that misses its play
/// time needs recovery; an on-time frame is SR-eligible when its arrival
/// (plus decode, when the cost says so) leaves room for inference before the
/// play deadline. `frame_loss` is the per-frame corruption probability used
/// for the expected counts.
ClassifiedChunk classify_frames(const ChunkTiming& chunk, const EnhancementCost& cost,
                                double frame_loss, Resolution res);

/// Stall charged to frame i (1-based) when it needs recovery: the recovery
/// runs from the moment the frame is due, so the viewer waits
/// max(0, min(lateness, t_rc)). A frame exactly on time owes nothing; a frame
/// that arrives strictly early is not a recovery frame and throws WrongClass.
double recovery_rebuffer_time(const ChunkTiming& chunk, const EnhancementCost& cost,
                              int frame_index);

}  // namespace easim
