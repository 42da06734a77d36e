#include "sparsedoa/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace sdoa {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

namespace {

using nlohmann::json;

void write_container(const std::filesystem::path& path, const char (&magic)[8], const std::string& header,
                     const void* payload, std::size_t payload_bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(magic, 8);
  const std::uint64_t len = header.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

struct Container {
  json header;
  std::vector<char> payload;
};

Container read_container(const std::filesystem::path& path, const char (&magic)[8]) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  char got[8];
  in.read(got, 8);
  if (!in || std::memcmp(got, magic, 8) != 0) throw Error("'" + path.string() + "' has the wrong file magic");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error("'" + path.string() + "' is truncated");
  Container c;
  c.header = json::parse(header);
  c.payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return c;
}

json stats_to_json(const MinMaxStats& s) {
  std::vector<int> constant(s.constant.begin(), s.constant.end());
  return {{"min", s.min}, {"max", s.max}, {"constant", constant}};
}

MinMaxStats stats_from_json(const json& j) {
  MinMaxStats s;
  if (j.is_null()) return s;
  s.min = j.at("min").get<std::vector<double>>();
  s.max = j.at("max").get<std::vector<double>>();
  const auto c = j.at("constant").get<std::vector<int>>();
  s.constant.assign(c.begin(), c.end());
  return s;
}

json spec_to_json(const DatasetSpec& s) {
  return {{"variant", std::string(to_string(s.variant))},
          {"positions", s.positions},
          {"sources", s.sources},
          {"angle_range_deg", {s.angle_lo, s.angle_hi}},
          {"min_gap_deg", s.min_gap},
          {"snapshots", s.snapshots},
          {"snr_range_db", {s.snr_lo, s.snr_hi}},
          {"failures",
           {{"min", s.failures.min_failures},
            {"max", s.failures.max_failures},
            {"include_zero", s.failures.include_zero}}},
          {"samples", s.samples},
          {"seed", s.seed}};
}

DatasetSpec spec_from_json(const json& j) {
  DatasetSpec s;
  s.variant = variant_from_string(j.at("variant").get<std::string>());
  s.positions = j.at("positions").get<std::vector<int>>();
  s.sources = j.at("sources").get<int>();
  s.angle_lo = j.at("angle_range_deg").at(0).get<double>();
  s.angle_hi = j.at("angle_range_deg").at(1).get<double>();
  s.min_gap = j.at("min_gap_deg").get<double>();
  s.snapshots = j.at("snapshots").get<int>();
  s.snr_lo = j.at("snr_range_db").at(0).get<double>();
  s.snr_hi = j.at("snr_range_db").at(1).get<double>();
  const auto& f = j.at("failures");
  s.failures.min_failures = f.at("min").get<int>();
  s.failures.max_failures = f.at("max").get<int>();
  s.failures.include_zero = f.at("include_zero").get<bool>();
  s.samples = j.at("samples").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

}  // namespace

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  json layers = json::array();
  std::vector<double> params;
  params.reserve(model.parameter_count());
  for (const auto& l : model.layers) {
    layers.push_back({{"fan_in", l.fan_in()}, {"fan_out", l.fan_out()}, {"relu", l.relu}, {"dropout", l.dropout}});
    params.insert(params.end(), l.weights.data.begin(), l.weights.data.end());
    params.insert(params.end(), l.bias.begin(), l.bias.end());
  }
  json header = {{"format", "sparsedoa-model"},
                 {"version", 1},
                 {"variant", std::string(to_string(model.variant))},
                 {"sensors", model.sensors},
                 {"M_v", model.M_v},
                 {"layers", layers},
                 {"input_norm", model.input_norm.empty() ? json(nullptr) : stats_to_json(model.input_norm)},
                 {"target_norm", model.target_norm.empty() ? json(nullptr) : stats_to_json(model.target_norm)},
                 {"seeds", {{"init", model.init_seed}, {"train", model.train_seed}}},
                 {"dataset_fingerprint", model.dataset_fingerprint},
                 {"parameter_count", params.size()}};
  write_container(path, kModelMagic, header.dump(), params.data(), params.size() * sizeof(double));
}

MlpModel load_model(const std::filesystem::path& path) {
  const auto c = read_container(path, kModelMagic);
  const auto& h = c.header;
  MlpModel m;
  m.variant = variant_from_string(h.at("variant").get<std::string>());
  m.sensors = h.at("sensors").get<int>();
  m.M_v = h.at("M_v").get<int>();
  m.init_seed = h.at("seeds").at("init").get<std::uint64_t>();
  m.train_seed = h.at("seeds").at("train").get<std::uint64_t>();
  m.dataset_fingerprint = h.at("dataset_fingerprint").get<std::string>();
  m.input_norm = stats_from_json(h.at("input_norm"));
  m.target_norm = stats_from_json(h.at("target_norm"));

  std::size_t expected = 0;
  for (const auto& lj : h.at("layers")) {
    DenseLayer l;
    l.weights = Matrix(lj.at("fan_in").get<std::size_t>(), lj.at("fan_out").get<std::size_t>());
    l.bias.assign(l.fan_out(), 0.0);
    l.relu = lj.at("relu").get<bool>();
    l.dropout = lj.at("dropout").get<double>();
    expected += l.weights.data.size() + l.bias.size();
    m.layers.push_back(std::move(l));
  }
  if (m.layers.empty()) throw Error("model file has no layers");
  if (c.payload.size() != expected * sizeof(double))
    throw Error("model file parameter block has the wrong size");
  const char* p = c.payload.data();
  for (auto& l : m.layers) {
    std::memcpy(l.weights.data.data(), p, l.weights.data.size() * sizeof(double));
    p += l.weights.data.size() * sizeof(double);
    std::memcpy(l.bias.data(), p, l.bias.size() * sizeof(double));
    p += l.bias.size() * sizeof(double);
  }
  return m;
}

void save_dataset(const TrainingDataset& data, const std::filesystem::path& path) {
  json header = {{"format", "sparsedoa-dataset"},
                 {"version", 1},
                 {"samples", data.size()},
                 {"input_dim", data.input_dim},
                 {"target_dim", data.target_dim},
                 {"metadata", spec_to_json(data.spec)},
                 {"fingerprint", data.fingerprint()}};
  std::vector<float> records;
  records.reserve(data.inputs.size() + data.targets.size());
  for (std::size_t s = 0; s < data.size(); ++s) {
    const auto in = data.inputs.begin() + static_cast<std::ptrdiff_t>(s * data.input_dim);
    const auto tg = data.targets.begin() + static_cast<std::ptrdiff_t>(s * data.target_dim);
    records.insert(records.end(), in, in + static_cast<std::ptrdiff_t>(data.input_dim));
    records.insert(records.end(), tg, tg + static_cast<std::ptrdiff_t>(data.target_dim));
  }
  write_container(path, kDatasetMagic, header.dump(), records.data(), records.size() * sizeof(float));
}

TrainingDataset load_dataset(const std::filesystem::path& path) {
  const auto c = read_container(path, kDatasetMagic);
  const auto& h = c.header;
  TrainingDataset d;
  d.spec = spec_from_json(h.at("metadata"));
  d.input_dim = h.at("input_dim").get<std::size_t>();
  d.target_dim = h.at("target_dim").get<std::size_t>();
  const auto n = h.at("samples").get<std::size_t>();
  const std::size_t row = d.input_dim + d.target_dim;
  if (c.payload.size() != n * row * sizeof(float)) throw Error("dataset file record block has the wrong size");
  d.inputs.resize(n * d.input_dim);
  d.targets.resize(n * d.target_dim);
  const auto* f = reinterpret_cast<const float*>(c.payload.data());
  for (std::size_t s = 0; s < n; ++s) {
    std::memcpy(d.inputs.data() + s * d.input_dim, f + s * row, d.input_dim * sizeof(float));
    std::memcpy(d.targets.data() + s * d.target_dim, f + s * row + d.input_dim, d.target_dim * sizeof(float));
  }
  if (h.contains("fingerprint") && h.at("fingerprint").get<std::string>() != d.fingerprint())
    throw Error("dataset file fingerprint does not match its records");
  return d;
}

void save_records(const std::string& header_json, const std::vector<float>& records,
                  const std::filesystem::path& path) {
  write_container(path, kDatasetMagic, header_json, records.data(), records.size() * sizeof(float));
}

}  // namespace sdoa
