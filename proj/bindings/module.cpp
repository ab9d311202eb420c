// Python bindings: the erasure codec, the frame-loss math, session scoring,
// trace synthesis, and the single-session simulator. Traces cross the
// boundary as plain lists; session reports come back as JSON text that the
// Python wrapper parses into dicts.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "easim/abr.hpp"
#include "easim/fec.hpp"
#include "easim/fecplan.hpp"
#include "easim/simulator.hpp"
#include "easim/synthetic.hpp"
#include "easim/traces.hpp"

namespace py = pybind11;
using namespace easim;

namespace {

LossModel make_loss_model(double loss_rate, bool bursty, double mean_burst_len,
                          double loss_in_bad) {
  return bursty ? LossModel::bursty(loss_rate, mean_burst_len, loss_in_bad)
                : LossModel::bernoulli(loss_rate);
}

LossMethod method_from_string(const std::string& s) {
  if (s == "analytic") return LossMethod::analytic;
  if (s == "monte_carlo") return LossMethod::monte_carlo;
  throw ConfigError("unknown method \"" + s + "\" (known: analytic, monte_carlo)");
}

// The named client configurations the CLI also understands: the stock suite
// plus the two threshold baselines.
SchemeSpec scheme_by_name(const std::string& name) {
  for (const SchemeSpec& s : SchemeSpec::default_suite())
    if (s.name == name) return s;
  if (name == "rate_based" || name == "buffer_based") {
    SchemeSpec s;
    s.name = name;
    s.policy.kind = policy_kind_from_string(name);
    s.enable_recovery = false;
    s.enable_sr = false;
    return s;
  }
  std::string known;
  for (const SchemeSpec& s : SchemeSpec::default_suite()) known += s.name + ", ";
  throw ConfigError("unknown scheme \"" + name + "\" (known: " + known +
                    "rate_based, buffer_based)");
}

NetworkTrace trace_from_lists(const std::string& id, const std::string& kind,
                              const std::vector<double>& timestamps,
                              const std::vector<double>& throughputs,
                              const std::vector<double>& losses) {
  if (timestamps.size() != throughputs.size() || timestamps.size() != losses.size())
    throw ValidationError("trace: timestamps, throughputs and losses must have equal length");
  NetworkTrace tr;
  tr.id = id;
  tr.kind = network_kind_from_string(kind);
  tr.samples.reserve(timestamps.size());
  for (std::size_t i = 0; i < timestamps.size(); ++i)
    tr.samples.push_back({timestamps[i], throughputs[i], losses[i]});
  tr.validate();
  return tr;
}

py::dict trace_to_dict(const NetworkTrace& tr) {
  std::vector<double> ts, tput, loss;
  ts.reserve(tr.samples.size());
  for (const TraceSample& s : tr.samples) {
    ts.push_back(s.timestamp_s);
    tput.push_back(s.throughput_kbps);
    loss.push_back(s.loss_rate);
  }
  py::dict d;
  d["id"] = tr.id;
  d["kind"] = std::string(to_string(tr.kind));
  d["timestamps"] = ts;
  d["throughput_kbps"] = tput;
  d["loss_rate"] = loss;
  return d;
}

}  // namespace

PYBIND11_MODULE(_easim, m) {
  m.doc() = "Streaming simulator core: erasure codec, loss math, and the session runner";

  py::register_exception<Error>(m, "EasimError");

  // --- erasure codec -------------------------------------------------------
  m.def(
      "fec_encode",
      [](int data_shards, int parity_shards, int shard_size, const py::bytes& payload) {
        FecConfig cfg{data_shards, parity_shards, shard_size};
        const std::string raw = payload;
        const auto shards = fec_encode(
            cfg, std::span<const std::uint8_t>(
                     reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
        std::vector<py::bytes> out;
        out.reserve(shards.size());
        for (const Shard& s : shards)
          out.emplace_back(reinterpret_cast<const char*>(s.data()), s.size());
        return out;
      },
      py::arg("data_shards"), py::arg("parity_shards"), py::arg("shard_size"),
      py::arg("payload"),
      "Split payload into data shards plus parity; any data_shards of the result decode.");

  m.def(
      "fec_decode",
      [](int data_shards, int parity_shards, int shard_size,
         const std::vector<std::optional<py::bytes>>& shards) {
        FecConfig cfg{data_shards, parity_shards, shard_size};
        std::vector<std::optional<Shard>> in;
        in.reserve(shards.size());
        for (const auto& s : shards) {
          if (!s) {
            in.emplace_back(std::nullopt);
            continue;
          }
          const std::string raw = *s;
          in.emplace_back(Shard(raw.begin(), raw.end()));
        }
        const std::vector<std::uint8_t> out = fec_decode(cfg, in);
        return py::bytes(reinterpret_cast<const char*>(out.data()), out.size());
      },
      py::arg("data_shards"), py::arg("parity_shards"), py::arg("shard_size"),
      py::arg("shards"),
      "Rebuild the (padded) payload from surviving shards; lost shards are None.");

  m.def("parity_for_ratio", &parity_for_ratio, py::arg("data_shards"), py::arg("ratio"),
        "Parity shard count for a redundancy ratio: ceil(ratio * data_shards).");

  // --- loss math -----------------------------------------------------------
  m.def(
      "frame_loss_probability",
      [](int data_packets, double redundancy_ratio, double loss_rate, bool bursty,
         double mean_burst_len, double loss_in_bad, const std::string& method, long trials,
         std::uint64_t seed) {
        return frame_loss_probability(data_packets, redundancy_ratio,
                                      make_loss_model(loss_rate, bursty, mean_burst_len,
                                                      loss_in_bad),
                                      method_from_string(method), trials, seed);
      },
      py::arg("data_packets"), py::arg("redundancy_ratio"), py::arg("loss_rate"),
      py::kw_only(), py::arg("bursty") = true, py::arg("mean_burst_len") = 4.0,
      py::arg("loss_in_bad") = 0.25, py::arg("method") = "monte_carlo",
      py::arg("trials") = 100000, py::arg("seed") = 1,
      "Probability a protected frame cannot be reconstructed.");

  m.def(
      "min_redundancy_for_target",
      [](int data_packets, double loss_rate, double target, const std::vector<double>& grid,
         bool bursty, double mean_burst_len, double loss_in_bad, const std::string& method,
         long trials, std::uint64_t seed) {
        return min_redundancy_for_target(data_packets,
                                         make_loss_model(loss_rate, bursty, mean_burst_len,
                                                         loss_in_bad),
                                         target, grid, method_from_string(method), trials, seed);
      },
      py::arg("data_packets"), py::arg("loss_rate"), py::arg("target"), py::arg("grid"),
      py::kw_only(), py::arg("bursty") = true, py::arg("mean_burst_len") = 4.0,
      py::arg("loss_in_bad") = 0.25, py::arg("method") = "monte_carlo",
      py::arg("trials") = 100000, py::arg("seed") = 1,
      "Smallest grid ratio meeting the frame-loss target, or None.");

  // --- session scoring -----------------------------------------------------
  m.def(
      "session_qoe",
      [](const std::vector<std::tuple<double, double, double>>& chunks,
         double rebuffer_penalty_kbps, double smoothness_weight, bool use_effective_bitrate) {
        std::vector<ChunkOutcome> outs;
        outs.reserve(chunks.size());
        for (const auto& [selected, effective, rebuffer] : chunks) {
          ChunkOutcome c;
          c.selected_bitrate_kbps = selected;
          c.effective_bitrate_kbps = effective;
          c.rebuffer_s = rebuffer;
          outs.push_back(c);
        }
        QoEConfig cfg;
        cfg.rebuffer_penalty_kbps = rebuffer_penalty_kbps;
        cfg.smoothness_weight = smoothness_weight;
        cfg.use_effective_bitrate = use_effective_bitrate;
        return session_qoe(outs, cfg);
      },
      py::arg("chunks"), py::kw_only(), py::arg("rebuffer_penalty_kbps") = 4400.0,
      py::arg("smoothness_weight") = 1.0, py::arg("use_effective_bitrate") = true,
      "Session score over (selected_kbps, effective_kbps, rebuffer_s) chunk tuples.");

  // --- traces and the simulator --------------------------------------------
  m.def(
      "synthesize_trace",
      [](const std::string& kind, double duration_s, std::uint64_t seed,
         std::optional<double> loss_override) {
        return trace_to_dict(
            synthesize_trace(network_kind_from_string(kind), duration_s, seed, loss_override));
      },
      py::arg("kind"), py::arg("duration_s"), py::arg("seed") = 1,
      py::arg("loss_override") = std::nullopt,
      "Seeded synthetic trace for a network kind ('3g', '4g', '5g', 'wifi').");

  m.def("default_scheme_names", [] {
    std::vector<std::string> names;
    for (const SchemeSpec& s : SchemeSpec::default_suite()) names.push_back(s.name);
    names.push_back("rate_based");
    names.push_back("buffer_based");
    return names;
  });

  m.def("default_quality_json", [] { return QualityModel::default_model().to_json_text(); });

  m.def(
      "run_session_json",
      [](const std::string& trace_id, const std::string& kind,
         const std::vector<double>& timestamps, const std::vector<double>& throughputs,
         const std::vector<double>& losses, const std::string& scheme, std::uint64_t seed,
         int max_chunks, std::optional<double> loss_override,
         const std::optional<std::string>& fec_plan_json, bool record_frames,
         bool record_decisions, int lookahead_chunks) {
        const NetworkTrace trace = trace_from_lists(trace_id, kind, timestamps, throughputs,
                                                    losses);
        const SchemeSpec spec = scheme_by_name(scheme);
        SimConfig cfg;
        cfg.policy = spec.policy;
        cfg.policy.lookahead_chunks = lookahead_chunks;
        cfg.enable_recovery = spec.enable_recovery;
        cfg.enable_sr = spec.enable_sr;
        cfg.enable_fec = spec.enable_fec;
        cfg.scheme_name = spec.name;
        cfg.seed = seed;
        cfg.max_chunks = max_chunks;
        cfg.loss_override = loss_override;
        cfg.record_frames = record_frames;
        cfg.record_decisions = record_decisions;
        if (fec_plan_json) cfg.fec_plan = FecPlan::from_json_text(*fec_plan_json);
        return run_session(trace, cfg).to_json_text();
      },
      py::arg("trace_id"), py::arg("kind"), py::arg("timestamps"), py::arg("throughputs"),
      py::arg("losses"), py::kw_only(), py::arg("scheme") = "aware", py::arg("seed") = 1,
      py::arg("max_chunks") = 0, py::arg("loss_override") = std::nullopt,
      py::arg("fec_plan_json") = std::nullopt, py::arg("record_frames") = false,
      py::arg("record_decisions") = false, py::arg("lookahead_chunks") = 1,
      "Simulate one playback session; returns the session report as JSON text.");
}
