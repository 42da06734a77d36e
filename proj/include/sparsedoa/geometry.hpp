#pragma once

#include <map>
#include <vector>

#include "sparsedoa/types.hpp"

namespace sdoa {

/// Linear sparse array on an integer grid of spacing d0 = lambda/2.
///
/// Positions are strictly increasing and normalized so the first is 0.
/// Failed sensors keep their position (they still exist physically) but are
/// excluded from every coarray computation. Sensor indices are 0-based here;
/// the CLI and config files use 1-based indices.
class ArrayGeometry {
 public:
  ArrayGeometry() = default;
  /// Validates, sorts and shifts `positions` so that min == 0.
  explicit ArrayGeometry(std::vector<int> positions, std::vector<int> failed = {});

  const std::vector<int>& positions() const { return positions_; }
  const std::vector<int>& failed() const { return failed_; }
  int size() const { return static_cast<int>(positions_.size()); }
  int aperture() const { return positions_.empty() ? 0 : positions_.back(); }
  bool is_failed(int index) const;
  std::vector<int> active_positions() const;
  int active_count() const { return size() - static_cast<int>(failed_.size()); }

  ArrayGeometry with_failures(std::vector<int> failed) const;
  ArrayGeometry without_failures() const { return ArrayGeometry(positions_); }

 private:
  std::vector<int> positions_;
  std::vector<int> failed_;
};

struct DifferenceCoarray {
  /// lag -> number of ordered sensor pairs (m, n) with d_m - d_n == lag.
  std::map<int, int> weight;
  /// Length of the contiguous segment {0, 1, ..., M_v - 1} contained in the lags.
  int M_v = 0;

  std::vector<int> lags() const;
  bool contains(int lag) const { return weight.count(lag) != 0; }
  int weight_of(int lag) const;
};

DifferenceCoarray difference_coarray(const ArrayGeometry& geom);

/// True iff every lag in [-aperture, aperture] is present.
bool is_hole_free(const DifferenceCoarray& co, int aperture);

/// Indices of sensors whose removal changes the coarray lag set.
std::vector<int> essential_sensors(const ArrayGeometry& geom);

/// Largest sensor count with a tabulated minimum-redundancy array.
inline constexpr int kMaxTabulatedMra = 10;

/// Tabulated restricted MRA; each entry is verified hole-free before return.
ArrayGeometry mra_lookup(int M);

/// Exhaustive search for the largest-aperture hole-free array with M sensors
/// and aperture at most max_aperture.
/// Ties are broken by the lexicographically smallest position vector.
ArrayGeometry mra_search(int M, int max_aperture);

}  // namespace sdoa
