#include "sparsedoa/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace sdoa {

using nlohmann::json;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::None: return "none";
    case Method::Failed: return "failed";
    case Method::Hybrid: return "hybrid";
    case Method::DataDriven: return "data-driven";
  }
  return "none";
}

Method method_from_string(std::string_view name) {
  if (name == "none") return Method::None;
  if (name == "failed" || name == "failed-baseline") return Method::Failed;
  if (name == "hybrid") return Method::Hybrid;
  if (name == "data-driven") return Method::DataDriven;
  throw Error("unknown method '" + std::string(name) + "'");
}

ExperimentConfig::ExperimentConfig() {
  for (int s = -20; s <= 20; s += 2) test_snr_db.push_back(s);
}

ArrayGeometry ExperimentConfig::geometry() const {
  return positions.empty() ? mra_lookup(mra_sensors) : ArrayGeometry(positions);
}

std::vector<int> ExperimentConfig::test_failed_indices() const {
  std::vector<int> out;
  for (int i : test_failed) out.push_back(i - 1);
  return out;
}

bool ExperimentConfig::uses(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

void ExperimentConfig::validate() const {
  const auto geom = geometry();
  for (int i : test_failed)
    if (i < 1 || i > geom.size()) throw Error("config: test_failed index out of range (indices are 1-based)");
  (void)geom.with_failures(test_failed_indices());
  if (test_snr_db.empty()) throw Error("config: test SNR grid is empty");
  if (trials < 1) throw Error("config: trials must be >= 1");
  if (sources < 1) throw Error("config: sources must be >= 1");
  if ((angle_hi - angle_lo) < (sources - 1) * min_gap) throw Error("config: infeasible angle constraints");
  if (!(grid_step > 0.0)) throw Error("config: grid step must be positive");
  if (snapshots < 1) throw Error("config: snapshots must be >= 1");
  if (sources >= difference_coarray(geom).M_v) throw Error("config: sources must be fewer than M_v");
}

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c;
  if (name == "paper") return c;
  if (name == "paper-fig4") {
    c.name = "paper-fig4";
    c.test_failed = {1, 4};
    return c;
  }
  if (name == "desk") {
    c.name = "desk";
    c.mra_sensors = 5;
    c.sources = 3;
    c.test_snr_db = {-10, -4, 0, 4, 10};
    c.trials = 300;
    c.test_failed = {1, 3};
    c.train_samples = 20000;
    c.epochs = 150;
    return c;
  }
  throw Error("unknown preset '" + std::string(name) + "'");
}

json to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (auto m : c.methods) methods.push_back(std::string(to_string(m)));
  if (c.crb) methods.push_back("crb");
  json geometry = c.positions.empty() ? json{{"mra", c.mra_sensors}} : json{{"positions", c.positions}};
  return {{"name", c.name},
          {"geometry", geometry},
          {"sources", c.sources},
          {"angle_range_deg", {c.angle_lo, c.angle_hi}},
          {"min_gap_deg", c.min_gap},
          {"snapshots", c.snapshots},
          {"train_snr_db", {c.train_snr_lo, c.train_snr_hi}},
          {"test_snr_db", c.test_snr_db},
          {"trials", c.trials},
          {"train_failures",
           {{"min", c.train_failures.min_failures},
            {"max", c.train_failures.max_failures},
            {"include_zero", c.train_failures.include_zero}}},
          {"test_failed", c.test_failed},
          {"methods", methods},
          {"grid_step_deg", c.grid_step},
          {"train_samples", c.train_samples},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.adam.lr},
          {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
          {"val_fraction", c.val_fraction},
          {"master_seed", c.master_seed},
          {"threads", c.threads}};
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  if (j.contains("preset")) c = preset(j.at("preset").get<std::string>());
  auto pair = [](const json& v, double& lo, double& hi) {
    lo = v.at(0).get<double>();
    hi = v.at(1).get<double>();
  };
  if (j.contains("name")) c.name = j.at("name").get<std::string>();
  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    if (g.contains("positions")) {
      c.positions = g.at("positions").get<std::vector<int>>();
    } else {
      c.positions.clear();
      c.mra_sensors = g.at("mra").get<int>();
    }
  }
  if (j.contains("sources")) c.sources = j.at("sources").get<int>();
  if (j.contains("angle_range_deg")) pair(j.at("angle_range_deg"), c.angle_lo, c.angle_hi);
  if (j.contains("min_gap_deg")) c.min_gap = j.at("min_gap_deg").get<double>();
  if (j.contains("snapshots")) c.snapshots = j.at("snapshots").get<int>();
  if (j.contains("train_snr_db")) pair(j.at("train_snr_db"), c.train_snr_lo, c.train_snr_hi);
  if (j.contains("test_snr_db")) {
    const auto& t = j.at("test_snr_db");
    c.test_snr_db.clear();
    if (t.is_object()) {
      const double start = t.at("start").get<double>(), stop = t.at("stop").get<double>(),
                   step = t.at("step").get<double>();
      if (!(step > 0.0)) throw Error("config: test_snr_db step must be positive");
      const auto n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
      for (int i = 0; i <= n; ++i) c.test_snr_db.push_back(start + i * step);
    } else {
      c.test_snr_db = t.get<std::vector<double>>();
    }
  }
  if (j.contains("trials")) c.trials = j.at("trials").get<int>();
  if (j.contains("train_failures")) {
    const auto& f = j.at("train_failures");
    c.train_failures.min_failures = f.value("min", c.train_failures.min_failures);
    c.train_failures.max_failures = f.value("max", c.train_failures.max_failures);
    c.train_failures.include_zero = f.value("include_zero", c.train_failures.include_zero);
  }
  if (j.contains("test_failed")) c.test_failed = j.at("test_failed").get<std::vector<int>>();
  if (j.contains("methods")) {
    c.methods.clear();
    c.crb = false;
    for (const auto& m : j.at("methods")) {
      const auto s = m.get<std::string>();
      if (s == "crb")
        c.crb = true;
      else
        c.methods.push_back(method_from_string(s));
    }
  }
  if (j.contains("grid_step_deg")) c.grid_step = j.at("grid_step_deg").get<double>();
  if (j.contains("train_samples")) c.train_samples = j.at("train_samples").get<int>();
  if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
  if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
  if (j.contains("learning_rate")) c.adam.lr = j.at("learning_rate").get<double>();
  if (j.contains("adam")) {
    const auto& a = j.at("adam");
    c.adam.beta1 = a.value("beta1", c.adam.beta1);
    c.adam.beta2 = a.value("beta2", c.adam.beta2);
    c.adam.eps = a.value("eps", c.adam.eps);
  }
  if (j.contains("val_fraction")) c.val_fraction = j.at("val_fraction").get<double>();
  if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  return config_from_json(json::parse(in), std::move(base));
}

}  // namespace sdoa
