#pragma once

#include <filesystem>
#include <string>

#include "sparsedoa/neural.hpp"

namespace sdoa {

// Container layout shared by model and dataset files:
//   8-byte magic | uint64 LE header length | JSON header | binary payload
//
// Model payload: per layer, weights (fan_in x fan_out, row-major) then bias,
// as little-endian float64.
// Dataset payload: per sample, input features then target features, as
// little-endian float32.

inline constexpr char kModelMagic[8] = {'S', 'D', 'O', 'A', 'M', 'D', 'L', '1'};
inline constexpr char kDatasetMagic[8] = {'S', 'D', 'O', 'A', 'D', 'A', 'T', '1'};

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

void save_dataset(const TrainingDataset& data, const std::filesystem::path& path);
TrainingDataset load_dataset(const std::filesystem::path& path);

/// Writes an arbitrary float32 record block (used by `simulate`) in the dataset container.
void save_records(const std::string& header_json, const std::vector<float>& records,
                  const std::filesystem::path& path);

}  // namespace sdoa
