#include "sparsedoa/geometry.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace sdoa {

namespace {

const std::map<int, std::vector<int>>& mra_table() {
  static const std::map<int, std::vector<int>> table = {
      {2, {0, 1}},
      {3, {0, 1, 3}},
      {4, {0, 1, 4, 6}},
      {5, {0, 2, 5, 8, 9}},
      {6, {0, 1, 6, 9, 11, 13}},
      {7, {0, 1, 8, 11, 13, 15, 17}},
      {8, {0, 1, 4, 10, 16, 18, 21, 23}},
      {9, {0, 1, 4, 10, 16, 22, 24, 27, 29}},
      {10, {0, 1, 4, 10, 16, 22, 28, 30, 33, 35}},
  };
  return table;
}

// Lag set (no weights) of a plain position list; used by the search loops.
bool hole_free_positions(const std::vector<int>& pos) {
  const int aperture = pos.back() - pos.front();
  std::vector<char> seen(static_cast<std::size_t>(aperture) + 1, 0);
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) seen[static_cast<std::size_t>(pos[i] - pos[j])] = 1;
  seen[0] = 1;
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

}  // namespace

ArrayGeometry::ArrayGeometry(std::vector<int> positions, std::vector<int> failed) {
  if (positions.empty()) throw Error("geometry: no sensors");
  std::sort(positions.begin(), positions.end());
  if (std::adjacent_find(positions.begin(), positions.end()) != positions.end())
    throw Error("geometry: duplicate sensor position");
  const int offset = positions.front();
  for (auto& p : positions) p -= offset;
  positions_ = std::move(positions);

  std::sort(failed.begin(), failed.end());
  failed.erase(std::unique(failed.begin(), failed.end()), failed.end());
  for (int f : failed)
    if (f < 0 || f >= size())
      throw Error("geometry: failed sensor index " + std::to_string(f) + " out of range");
  if (static_cast<int>(failed.size()) >= size())
    throw Error("geometry: at least one sensor must remain active");
  failed_ = std::move(failed);
}

bool ArrayGeometry::is_failed(int index) const {
  return std::binary_search(failed_.begin(), failed_.end(), index);
}

std::vector<int> ArrayGeometry::active_positions() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (!is_failed(i)) out.push_back(positions_[static_cast<std::size_t>(i)]);
  return out;
}

ArrayGeometry ArrayGeometry::with_failures(std::vector<int> failed) const {
  return ArrayGeometry(positions_, std::move(failed));
}

std::vector<int> DifferenceCoarray::lags() const {
  std::vector<int> out;
  out.reserve(weight.size());
  for (const auto& [lag, w] : weight) out.push_back(lag);
  return out;
}

int DifferenceCoarray::weight_of(int lag) const {
  auto it = weight.find(lag);
  return it == weight.end() ? 0 : it->second;
}

DifferenceCoarray difference_coarray(const ArrayGeometry& geom) {
  const auto active = geom.active_positions();
  if (active.empty()) throw Error("difference_coarray: empty array");
  DifferenceCoarray co;
  for (int dm : active)
    for (int dn : active) ++co.weight[dm - dn];
  while (co.contains(co.M_v)) ++co.M_v;
  return co;
}

bool is_hole_free(const DifferenceCoarray& co, int aperture) {
  for (int lag = -aperture; lag <= aperture; ++lag)
    if (!co.contains(lag)) return false;
  return true;
}

std::vector<int> essential_sensors(const ArrayGeometry& geom) {
  const auto& pos = geom.positions();
  if (pos.size() == 1) return {0};
  const auto full = difference_coarray(geom.without_failures()).lags();
  std::vector<int> out;
  for (int i = 0; i < geom.size(); ++i) {
    const auto reduced = difference_coarray(geom.without_failures().with_failures({i})).lags();
    if (reduced != full) out.push_back(i);
  }
  return out;
}

ArrayGeometry mra_lookup(int M) {
  const auto& table = mra_table();
  auto it = table.find(M);
  if (it == table.end()) throw Error("mra_lookup: no tabulated MRA for M = " + std::to_string(M));
  ArrayGeometry geom(it->second);
  const auto co = difference_coarray(geom);
  if (!is_hole_free(co, geom.aperture()) || co.M_v != geom.aperture() + 1)
    throw Error("mra_lookup: table entry for M = " + std::to_string(M) + " is not hole-free");
  return geom;
}

ArrayGeometry mra_search(int M, int max_aperture) {
  if (M < 1) throw Error("mra_search: M must be positive");
  if (M == 1) return ArrayGeometry({0});
  if (max_aperture < M - 1)
    throw Error("mra_search: no hole-free array with " + std::to_string(M) +
                " sensors within aperture " + std::to_string(max_aperture));
  // A hole-free array has at most M(M-1)/2 distinct positive lags; search downward.
  const int top = std::min(max_aperture, M * (M - 1) / 2);
  for (int aperture = top; aperture >= M - 1; --aperture) {
    // Interior positions: choose M-2 of {1..aperture-1} in lexicographic order.
    const int inner = M - 2;
    std::vector<int> pick(static_cast<std::size_t>(inner));
    for (int i = 0; i < inner; ++i) pick[static_cast<std::size_t>(i)] = i + 1;
    std::vector<int> pos(static_cast<std::size_t>(M));
    while (true) {
      pos.front() = 0;
      std::copy(pick.begin(), pick.end(), pos.begin() + 1);
      pos.back() = aperture;
      if (hole_free_positions(pos)) return ArrayGeometry(pos);
      int i = inner - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == aperture - 1 - (inner - 1 - i)) --i;
      if (i < 0) break;
      ++pick[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < inner; ++j)
        pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  throw Error("mra_search: no hole-free array with " + std::to_string(M) +
              " sensors within aperture " + std::to_string(max_aperture));
}

}  // namespace sdoa
