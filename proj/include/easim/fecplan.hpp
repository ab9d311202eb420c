#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "easim/errors.hpp"

namespace easim {

/// Offline loss-rate -> redundancy-ratio table, built by sweeping simulated
/// sessions and kept as a lookup so the online path never solves the joint
/// problem itself.
struct FecPlan {
  std::string scheme;              // policy the table was built for
  std::vector<double> loss_grid;   // ascending
  std::vector<double> ratio_grid;  // ascending; table values come from here
  std::vector<double> table;       // chosen ratio per loss_grid entry

  void validate() const;

  /// Ratio at the nearest loss grid point; midpoints round up (toward the
  /// higher loss), queries outside the grid clamp to its ends.
  double lookup(double predicted_loss) const;

  static FecPlan from_json_text(const std::string& text);
  static FecPlan load(const std::filesystem::path& path);
  std::string to_json_text() const;
};

}  // namespace easim
