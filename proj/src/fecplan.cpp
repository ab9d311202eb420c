#include "easim/fecplan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "util.hpp"

namespace easim {

using nlohmann::json;

void FecPlan::validate() const {
  if (scheme.empty()) throw ValidationError("fec plan: scheme name is empty");
  if (loss_grid.empty()) throw ValidationError("fec plan: empty loss grid");
  if (ratio_grid.empty()) throw ValidationError("fec plan: empty ratio grid");
  auto ascending = [](const std::vector<double>& v, const char* name) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] >= 0)) throw ValidationError(std::string("fec plan: ") + name + " has negative entries");
      if (i > 0 && !(v[i] > v[i - 1]))
        throw ValidationError(std::string("fec plan: ") + name + " must be strictly ascending");
    }
  };
  ascending(loss_grid, "loss_grid");
  ascending(ratio_grid, "ratio_grid");
  if (table.size() != loss_grid.size())
    throw ValidationError("fec plan: table must have one ratio per loss grid point");
  for (double r : table) {
    const bool on_grid = std::any_of(ratio_grid.begin(), ratio_grid.end(),
                                     [r](double g) { return std::abs(g - r) <= 1e-12; });
    if (!on_grid) throw ValidationError("fec plan: table ratio " + detail::fmt(r) + " not on the grid");
  }
}

double FecPlan::lookup(double predicted_loss) const {
  validate();
  if (!(predicted_loss >= 0)) throw ValidationError("fec plan: predicted loss must be non-negative");
  if (predicted_loss <= loss_grid.front()) return table.front();
  if (predicted_loss >= loss_grid.back()) return table.back();
  // Nearest grid point; an exact midpoint rounds toward the higher loss.
  std::size_t best = 0;
  for (std::size_t i = 1; i < loss_grid.size(); ++i) {
    const double d_best = std::abs(loss_grid[best] - predicted_loss);
    const double d_i = std::abs(loss_grid[i] - predicted_loss);
    if (d_i < d_best || (d_i == d_best && loss_grid[i] > loss_grid[best])) best = i;
  }
  return table[best];
}

FecPlan FecPlan::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("fec plan: ") + e.what());
  }
  detail::require_keys<ParseError>(j, {"scheme", "loss_grid", "ratio_grid", "table"}, "fec plan");
  FecPlan p;
  if (!j.contains("scheme") || !j.at("scheme").is_string())
    throw ParseError("fec plan: missing string key \"scheme\"");
  p.scheme = j.at("scheme").get<std::string>();
  auto grid = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_array())
      throw ParseError(std::string("fec plan: missing array key \"") + key + "\"");
    std::vector<double> v;
    for (const auto& e : j.at(key)) {
      if (!e.is_number()) throw ParseError(std::string("fec plan: ") + key + " entries must be numbers");
      v.push_back(e.get<double>());
    }
    return v;
  };
  p.loss_grid = grid("loss_grid");
  p.ratio_grid = grid("ratio_grid");
  p.table = grid("table");
  p.validate();
  return p;
}

FecPlan FecPlan::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("fec plan: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string FecPlan::to_json_text() const {
  validate();
  json j;
  j["scheme"] = scheme;
  j["loss_grid"] = loss_grid;
  j["ratio_grid"] = ratio_grid;
  j["table"] = table;
  return j.dump(2) + "\n";
}

}  // namespace easim
