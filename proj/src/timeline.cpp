#include "easim/timeline.hpp"

#include <algorithm>
#include <cmath>

#include "util.hpp"

namespace easim {

ChunkTiming ChunkTiming::uniform(double t_prev_s, double delta_s, double total_bytes, int n_frames,
                                 double throughput_kbps) {
  if (n_frames < 1) throw ValidationError("chunk: needs at least 1 frame");
  ChunkTiming c;
  c.t_prev_s = t_prev_s;
  c.delta_s = delta_s;
  c.throughput_kbps = throughput_kbps;
  c.frame_bytes.assign(n_frames, total_bytes / n_frames);
  c.validate();
  return c;
}

void ChunkTiming::validate() const {
  if (!(delta_s > 0)) throw ValidationError("chunk: frame interval must be positive");
  if (frame_bytes.empty()) throw ValidationError("chunk: no frames");
  for (double b : frame_bytes)
    if (!(b > 0) || !std::isfinite(b))
      throw ValidationError("chunk: frame sizes must be finite and positive");
  if (!(throughput_kbps > 0)) throw ZeroThroughput("chunk: throughput must be positive");
  if (!std::isfinite(t_prev_s)) throw ValidationError("chunk: t_prev must be finite");
}

namespace {

// Frames are 1-indexed; 0 is a caller bug, not "the first frame".
void check_index(const ChunkTiming& c, int i) {
  if (i < 1 || i > c.frame_count())
    throw IndexOutOfRange("chunk: frame " + std::to_string(i) + " outside 1.." +
                          std::to_string(c.frame_count()));
}

}  // namespace

double expected_play_time(const ChunkTiming& chunk, int frame_index) {
  chunk.validate();
  check_index(chunk, frame_index);
  return chunk.t_prev_s + frame_index * chunk.delta_s;
}

double expected_arrival_time(const ChunkTiming& chunk, int frame_index) {
  chunk.validate();
  check_index(chunk, frame_index);
  double bytes = 0;
  for (int i = 1; i <= frame_index; ++i) bytes += chunk.frame_bytes[i - 1];
  const double kbits = bytes * 8.0 / 1000.0;
  return chunk.t_prev_s + kbits / chunk.throughput_kbps;
}

const char* to_string(FrameKind k) {
  switch (k) {
    case FrameKind::needs_recovery: return "needs_recovery";
    case FrameKind::sr_eligible: return "sr_eligible";
    case FrameKind::received_no_sr: return "received_no_sr";
  }
  throw ValidationError("unknown frame kind");
}

ClassifiedChunk classify_frames(const ChunkTiming& chunk, const EnhancementCost& cost,
                                double frame_loss, Resolution res) {
  chunk.validate();
  cost.validate();
  if (!(frame_loss >= 0 && frame_loss <= 1))
    throw ValidationError("classify: frame loss outside [0, 1]");

  ClassifiedChunk out;
  out.frames.reserve(chunk.frame_count());
  const double sr_setup = cost.t_sr_s + (cost.decode_latency_in_sr_gate ? cost.decode_s(res) : 0.0);

  double bytes = 0;
  for (int i = 1; i <= chunk.frame_count(); ++i) {
    bytes += chunk.frame_bytes[i - 1];
    FrameClass fc;
    fc.index = i;
    fc.t_play_s = chunk.t_prev_s + i * chunk.delta_s;
    fc.t_arr_s = chunk.t_prev_s + bytes * 8.0 / 1000.0 / chunk.throughput_kbps;
    if (fc.t_arr_s > fc.t_play_s) {
      fc.kind = FrameKind::needs_recovery;
      ++out.late_count;
    } else if (fc.t_play_s > fc.t_arr_s + sr_setup) {
      fc.kind = FrameKind::sr_eligible;
      ++out.sr_eligible_count;
    } else {
      fc.kind = FrameKind::received_no_sr;
      ++out.plain_count;
    }
    out.frames.push_back(fc);
  }

  // Late frames need recovery no matter what; the loss fraction then claims
  // its share of the remaining on-time frames (no double counting).
  const int n = chunk.frame_count();
  const int on_time = n - out.late_count;
  out.expected_recovered = out.late_count + frame_loss * on_time;
  out.expected_sr = (1.0 - frame_loss) * out.sr_eligible_count;
  out.expected_plain = n - out.expected_recovered - out.expected_sr;
  return out;
}

double recovery_rebuffer_time(const ChunkTiming& chunk, const EnhancementCost& cost,
                              int frame_index) {
  chunk.validate();
  cost.validate();
  check_index(chunk, frame_index);
  const double t_play = expected_play_time(chunk, frame_index);
  const double t_arr = expected_arrival_time(chunk, frame_index);
  if (t_arr < t_play)
    throw WrongClass("recovery_rebuffer: frame " + std::to_string(frame_index) +
                     " arrives before its deadline");
  return std::max(0.0, std::min(t_arr - t_play, cost.t_rc_s));
}

}  // namespace easim
