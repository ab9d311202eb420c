#include "easim/traces.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "util.hpp"

namespace easim {

using nlohmann::json;

const char* to_string(NetworkKind k) {
  switch (k) {
    case NetworkKind::net3g: return "3g";
    case NetworkKind::net4g: return "4g";
    case NetworkKind::net5g: return "5g";
    case NetworkKind::wifi: return "wifi";
    case NetworkKind::synthetic: return "synthetic";
  }
  throw ValidationError("unknown network kind");
}

NetworkKind network_kind_from_string(const std::string& s) {
  std::string t;
  for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "3g") return NetworkKind::net3g;
  if (t == "4g" || t == "lte") return NetworkKind::net4g;
  if (t == "5g") return NetworkKind::net5g;
  if (t == "wifi") return NetworkKind::wifi;
  if (t == "synthetic") return NetworkKind::synthetic;
  throw ParseError("unknown network kind \"" + s + "\"");
}

void NetworkTrace::validate() const {
  if (samples.size() < 2) throw ValidationError("trace " + id + ": needs at least 2 samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.timestamp_s) || !std::isfinite(s.throughput_kbps) ||
        !std::isfinite(s.loss_rate))
      throw ValidationError("trace " + id + ": non-finite sample " + std::to_string(i));
    if (s.throughput_kbps < 0)
      throw ValidationError("trace " + id + ": negative throughput at sample " + std::to_string(i));
    if (s.loss_rate < 0 || s.loss_rate > 1)
      throw ValidationError("trace " + id + ": loss rate outside [0, 1] at sample " +
                            std::to_string(i));
    if (i > 0 && !(s.timestamp_s > samples[i - 1].timestamp_s))
      throw ValidationError("trace " + id + ": timestamps must be strictly increasing (sample " +
                            std::to_string(i) + ")");
  }
  bool any_tput = false;
  for (const auto& s : samples) any_tput |= s.throughput_kbps > 0;
  if (!any_tput) throw DegenerateTrace("trace " + id + ": throughput is zero everywhere");
}

namespace {

// Time-weighted mean of a piecewise-constant column; the last sample's value
// carries no weight (nothing plays past the trace end).
double weighted_mean(const std::vector<TraceSample>& samples, double TraceSample::* field) {
  double acc = 0, span = 0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const double dt = samples[i + 1].timestamp_s - samples[i].timestamp_s;
    acc += samples[i].*field * dt;
    span += dt;
  }
  return acc / span;
}

}  // namespace

double NetworkTrace::mean_throughput_kbps() const {
  validate();
  return weighted_mean(samples, &TraceSample::throughput_kbps);
}

double NetworkTrace::mean_loss_rate() const {
  validate();
  return weighted_mean(samples, &TraceSample::loss_rate);
}

namespace {

const TraceSample& sample_at(const NetworkTrace& t, double at) {
  if (at < t.start_s() || at > t.end_s())
    throw OutOfRange("trace " + t.id + ": time " + detail::fmt(at) + " outside [" +
                     detail::fmt(t.start_s()) + ", " + detail::fmt(t.end_s()) + "]");
  // Last sample whose timestamp is <= at.
  auto it = std::upper_bound(t.samples.begin(), t.samples.end(), at,
                             [](double v, const TraceSample& s) { return v < s.timestamp_s; });
  return *(it - 1);
}

}  // namespace

double NetworkTrace::throughput_at(double t) const { return sample_at(*this, t).throughput_kbps; }
double NetworkTrace::loss_rate_at(double t) const { return sample_at(*this, t).loss_rate; }

namespace {

NetworkKind kind_from_name(const std::string& name) {
  std::string t;
  for (char c : name) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t.find("wifi") != std::string::npos) return NetworkKind::wifi;
  if (t.find("3g") != std::string::npos) return NetworkKind::net3g;
  if (t.find("4g") != std::string::npos || t.find("lte") != std::string::npos)
    return NetworkKind::net4g;
  if (t.find("5g") != std::string::npos) return NetworkKind::net5g;
  return NetworkKind::synthetic;
}

NetworkTrace parse_csv(std::istream& in, const std::string& name) {
  NetworkTrace t;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip a trailing CR and surrounding whitespace.
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;  // blank line
    line = line.substr(start);
    if (line[0] == '#') continue;
    if (t.samples.empty() && !header_seen &&
        line.find_first_not_of("0123456789.,+-eE \t") != std::string::npos) {
      // Header row (first content line, possibly after comments); accept any
      // column naming but require three columns.
      if (std::count(line.begin(), line.end(), ',') != 2)
        throw ParseError(name + ":" + std::to_string(lineno) + ": header must have 3 columns");
      header_seen = true;
      continue;
    }
    TraceSample s;
    char extra;
    if (std::sscanf(line.c_str(), "%lf ,%lf ,%lf %c", &s.timestamp_s, &s.throughput_kbps,
                    &s.loss_rate, &extra) != 3)
      throw ParseError(name + ":" + std::to_string(lineno) + ": expected 3 numeric columns, got \"" +
                       line + "\"");
    t.samples.push_back(s);
  }
  return t;
}

NetworkTrace parse_json(std::istream& in, const std::string& name) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(name + ": " + e.what());
  }
  detail::require_keys<ParseError>(j, {"id", "network_kind", "samples"}, "trace " + name);
  NetworkTrace t;
  if (j.contains("id")) {
    if (!j.at("id").is_string()) throw ParseError(name + ": id must be a string");
    t.id = j.at("id").get<std::string>();
  }
  if (j.contains("network_kind")) {
    if (!j.at("network_kind").is_string()) throw ParseError(name + ": network_kind must be a string");
    t.kind = network_kind_from_string(j.at("network_kind").get<std::string>());
  }
  if (!j.contains("samples") || !j.at("samples").is_array())
    throw ParseError(name + ": missing \"samples\" array");
  for (const auto& e : j.at("samples")) {
    detail::require_keys<ParseError>(e, {"timestamp_s", "throughput_kbps", "loss_rate"},
                                     name + " sample");
    TraceSample s;
    s.timestamp_s = detail::get_number(e, "timestamp_s", name);
    s.throughput_kbps = detail::get_number(e, "throughput_kbps", name);
    s.loss_rate = detail::get_number(e, "loss_rate", name);
    t.samples.push_back(s);
  }
  return t;
}

}  // namespace

NetworkTrace load_trace(const std::filesystem::path& path, TraceFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("trace: cannot open " + path.string());
  TraceFormat f = format;
  if (f == TraceFormat::infer) {
    const auto ext = path.extension().string();
    if (ext == ".json") f = TraceFormat::json;
    else if (ext == ".csv") f = TraceFormat::csv;
    else throw ParseError("trace: cannot infer format of " + path.string());
  }
  NetworkTrace t = f == TraceFormat::csv ? parse_csv(in, path.filename().string())
                                         : parse_json(in, path.filename().string());
  if (t.id.empty()) t.id = path.stem().string();
  if (t.kind == NetworkKind::synthetic) t.kind = kind_from_name(t.id);
  t.validate();
  return t;
}

std::string trace_to_csv(const NetworkTrace& trace) {
  std::string out = "timestamp_s,throughput_kbps,loss_rate\n";
  for (const auto& s : trace.samples) {
    out += detail::fmt(s.timestamp_s, 3);
    out += ',';
    out += detail::fmt(s.throughput_kbps, 3);
    out += ',';
    out += detail::fmt(s.loss_rate, 6);
    out += '\n';
  }
  return out;
}

void save_trace_csv(const NetworkTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("trace: cannot write " + path.string());
  out << trace_to_csv(trace);
}

std::vector<NetworkTrace> load_trace_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw ParseError("trace dir: " + dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (ext == ".csv" || ext == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ParseError("trace dir: no .csv or .json traces in " + dir.string());
  std::vector<NetworkTrace> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_trace(f));
  return out;
}

NetworkTrace downscale_trace(const NetworkTrace& trace, const LadderSpec& ladder,
                             std::optional<double> target_mean_kbps) {
  trace.validate();
  ladder.validate();
  const double target = target_mean_kbps.value_or(ladder.mid_bitrate_kbps());
  if (!(target > 0)) throw ValidationError("downscale: target mean must be positive");
  const double mean = trace.mean_throughput_kbps();
  const double scale = target / mean;
  NetworkTrace out = trace;
  for (auto& s : out.samples) s.throughput_kbps *= scale;
  return out;
}

Predictor Predictor::ewma(double alpha) {
  if (!(alpha > 0 && alpha <= 1)) throw ValidationError("ewma: alpha must be in (0, 1]");
  Predictor p;
  p.kind = PredictorKind::ewma;
  p.ewma_alpha = alpha;
  return p;
}

Predictor Predictor::holt_winters(double level_alpha, double trend_beta) {
  if (!(level_alpha > 0 && level_alpha <= 1) || !(trend_beta >= 0 && trend_beta <= 1))
    throw ValidationError("holt_winters: alpha in (0, 1], beta in [0, 1]");
  Predictor p;
  p.kind = PredictorKind::holt_winters;
  p.hw_level_alpha = level_alpha;
  p.hw_trend_beta = trend_beta;
  return p;
}

double Predictor::prediction() const {
  if (!initialized) throw NotInitialized("predictor: no observations yet");
  return kind == PredictorKind::ewma ? level : level + trend;
}

std::pair<Predictor, double> predict_next(const Predictor& state, double observation) {
  if (!std::isfinite(observation) || observation < 0)
    throw ValidationError("predictor: observations must be finite and non-negative");
  Predictor next = state;
  next.observations = state.observations + 1;
  if (!state.initialized) {
    next.initialized = true;
    next.level = observation;
    next.trend = 0;
    return {next, next.prediction()};
  }
  if (state.kind == PredictorKind::ewma) {
    next.level = state.ewma_alpha * observation + (1 - state.ewma_alpha) * state.level;
  } else {
    const double a = state.hw_level_alpha, b = state.hw_trend_beta;
    const double level = a * observation + (1 - a) * (state.level + state.trend);
    next.trend = b * (level - state.level) + (1 - b) * state.trend;
    next.level = level;
  }
  return {next, next.prediction()};
}

double predict_clamped(const Predictor& state, double lo, double hi) {
  return std::min(hi, std::max(lo, state.prediction()));
}

}  // namespace easim
