// Command-line front end: geometry inspection, simulation, dataset generation,
// training, single-trial evaluation, Monte Carlo sweeps and spectrum export.

#include <omp.h>

#include <Eigen/Core>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sparsedoa/coarray.hpp"
#include "sparsedoa/harness.hpp"
#include "sparsedoa/io.hpp"

using namespace sdoa;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  int threads = 0;
};

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.preset_name.empty() ? ExperimentConfig{} : preset(c.preset_name);
  if (!c.config_path.empty()) cfg = load_config(c.config_path, cfg);
  if (c.seed) cfg.master_seed = *c.seed;
  if (c.threads > 0) cfg.threads = c.threads;
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  cfg.validate();
  return cfg;
}

std::string snr_tag(double snr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", snr);
  return buf;
}

// Config, derived seeds and build versions; written next to every output.
json manifest(const std::string& command, const ExperimentConfig& cfg, const std::vector<std::string>& outputs,
              double seconds, json extra = json::object()) {
  json seeds = {{"master", cfg.master_seed},
                {"dataset", dataset_spec(cfg, Variant::Hybrid).seed},
                {"train_hybrid", train_options(cfg, Variant::Hybrid).seed},
                {"train_data_driven", train_options(cfg, Variant::DataDriven).seed}};
  json j = {{"command", command},
            {"config", to_json(cfg)},
            {"seeds", seeds},
            {"versions",
             {{"sparsedoa", SPARSEDOA_VERSION},
              {"compiler", __VERSION__},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"openmp", _OPENMP},
              {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                           "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
            {"threads", cfg.threads > 0 ? cfg.threads : omp_get_max_threads()},
            {"outputs", outputs},
            {"wall_seconds", seconds}};
  j.update(extra);
  return j;
}

void finish(const Common& c, const std::string& command, const ExperimentConfig& cfg,
            std::vector<std::string> outputs, std::chrono::steady_clock::time_point t0, json extra = json::object()) {
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto path = fs::path(c.out) / (command + "_manifest.json");
  write_text(path, manifest(command, cfg, outputs, s, std::move(extra)).dump(2) + "\n");
  for (const auto& o : outputs) std::cout << "wrote " << o << "\n";
  std::cout << "wrote " << path.string() << "\n";
}

Models load_models(const std::string& hybrid, const std::string& data_driven) {
  Models m;
  if (!hybrid.empty()) m.hybrid = load_model(hybrid);
  if (!data_driven.empty()) m.data_driven = load_model(data_driven);
  return m;
}

// Fills in models the config needs: explicit paths, then <out>/model_<variant>.bin,
// then (with --train) trains them in-process.
Models resolve_models(const ExperimentConfig& cfg, const Common& c, const std::string& hybrid,
                      const std::string& data_driven, bool train_missing) {
  Models m = load_models(hybrid, data_driven);
  auto fill = [&](Method method, Variant v, std::optional<MlpModel>& slot) {
    if (!cfg.uses(method) || slot) return;
    const auto path = fs::path(c.out) / ("model_" + std::string(to_string(v)) + ".bin");
    if (fs::exists(path)) {
      slot = load_model(path);
    } else if (train_missing) {
      std::cerr << "training " << to_string(v) << " model\n";
      slot = train_variant(cfg, v);
      save_model(*slot, path);
    } else {
      throw Error(std::string(to_string(method)) + " requires a model: pass --" + std::string(to_string(v)) +
                  " <file>, run `sdoa train`, or add --train");
    }
  };
  fill(Method::Hybrid, Variant::Hybrid, m.hybrid);
  fill(Method::DataDriven, Variant::DataDriven, m.data_driven);
  return m;
}

std::vector<int> one_based(const std::vector<int>& v) {
  std::vector<int> out;
  for (int i : v) out.push_back(i + 1);
  return out;
}

void print_geometry(const ArrayGeometry& g, bool as_json) {
  const auto co = difference_coarray(g);
  const auto ess = essential_sensors(g.without_failures());
  std::vector<int> holes;
  for (int lag = -g.aperture(); lag <= g.aperture(); ++lag)
    if (!co.contains(lag)) holes.push_back(lag);
  if (as_json) {
    json w = json::object();
    for (const auto& [lag, n] : co.weight) w[std::to_string(lag)] = n;
    std::cout << json{{"positions", g.positions()},
                      {"failed", one_based(g.failed())},
                      {"active_positions", g.active_positions()},
                      {"aperture", g.aperture()},
                      {"lags", co.lags()},
                      {"weights", w},
                      {"M_v", co.M_v},
                      {"virtual_elements", 2 * co.M_v - 1},
                      {"holes", holes},
                      {"hole_free", holes.empty()},
                      {"essential", one_based(ess)}}
                     .dump(2)
              << "\n";
    return;
  }
  auto list = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s.empty() ? std::string("-") : s;
  };
  std::printf("positions    %s\n", list(g.positions()).c_str());
  std::printf("failed       %s\n", list(one_based(g.failed())).c_str());
  std::printf("aperture     %d\n", g.aperture());
  std::printf("M_v          %d (%d virtual elements)\n", co.M_v, 2 * co.M_v - 1);
  std::printf("holes        %s\n", list(holes).c_str());
  std::printf("essential    %s\n", list(one_based(ess)).c_str());
  std::printf("%6s %6s\n", "lag", "weight");
  for (const auto& [lag, n] : co.weight) std::printf("%6d %6d\n", lag, n);
}

std::string joined(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + snr_tag(v[i]);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-array DOA estimation under sensor failures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPARSEDOA_VERSION);

  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config_path, "JSON config file (overlays the preset)")->check(CLI::ExistingFile);
    sub->add_option("--preset", c.preset_name, "Base preset")
        ->check(CLI::IsMember({"paper", "paper-fig4", "desk"}));
    sub->add_option("--seed", c.seed, "Master seed");
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads (0 = OpenMP default)");
  };

  // geometry
  auto* geo = app.add_subcommand("geometry", "Print positions, lags, weights, M_v and essential sensors");
  add_common(geo);
  int geo_mra = 0;
  std::vector<int> geo_positions, geo_failed;
  bool geo_json = false;
  geo->add_option("--mra", geo_mra, "Tabulated MRA with this many sensors");
  geo->add_option("--positions", geo_positions, "Explicit positions in units of d0")->delimiter(',');
  geo->add_option("--failed", geo_failed, "Failed sensors (1-based)")->delimiter(',');
  geo->add_flag("--json", geo_json, "JSON instead of aligned text");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate one scene and write snapshots, covariance or coarray");
  add_common(sim);
  double sim_snr = 10.0;
  int sim_trial = 0;
  std::string sim_emit = "covariance";
  bool sim_failures = false;
  sim->add_option("--snr", sim_snr, "SNR in dB")->capture_default_str();
  sim->add_option("--trial", sim_trial, "Trial index q (selects the scene seed)")->capture_default_str();
  sim->add_option("--emit", sim_emit, "What to write")
      ->check(CLI::IsMember({"snapshots", "covariance", "coarray"}))
      ->capture_default_str();
  sim->add_flag("--with-failures", sim_failures, "Apply the config's test failures");

  // dataset
  auto* dat = app.add_subcommand("dataset", "Generate a training dataset");
  add_common(dat);
  std::string dat_variant = "hybrid";
  dat->add_option("--variant", dat_variant, "hybrid or data-driven")
      ->check(CLI::IsMember({"hybrid", "data-driven"}))
      ->capture_default_str();

  // train
  auto* trn = app.add_subcommand("train", "Train a repair model");
  add_common(trn);
  std::string trn_variant = "hybrid", trn_dataset;
  std::uint64_t trn_offset = 0;
  trn->add_option("--variant", trn_variant, "hybrid or data-driven")
      ->check(CLI::IsMember({"hybrid", "data-driven"}))
      ->capture_default_str();
  trn->add_option("--dataset", trn_dataset, "Existing dataset file (generated when omitted)")->check(CLI::ExistingFile);
  trn->add_option("--seed-offset", trn_offset, "Alternative training seed (init, shuffling, dropout)");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate one trial with every configured method");
  add_common(ev);
  double ev_snr = 0.0;
  int ev_trial = 0;
  std::string ev_emit = "doa", ev_hybrid, ev_dd, ev_method = "none";
  ev->add_option("--snr", ev_snr, "SNR in dB")->capture_default_str();
  ev->add_option("--trial", ev_trial, "Trial index q")->capture_default_str();
  ev->add_option("--emit", ev_emit, "doa (estimates as JSON) or spectrum (CSV for --method)")
      ->check(CLI::IsMember({"doa", "spectrum"}))
      ->capture_default_str();
  ev->add_option("--method", ev_method, "Method for --emit spectrum")->capture_default_str();
  ev->add_option("--hybrid", ev_hybrid, "Hybrid model file")->check(CLI::ExistingFile);
  ev->add_option("--data-driven", ev_dd, "Data-driven model file")->check(CLI::ExistingFile);

  // sweep
  auto* sw = app.add_subcommand("sweep", "Monte Carlo sweep over the test SNR grid");
  add_common(sw);
  std::string sw_hybrid, sw_dd;
  bool sw_train = false;
  sw->add_option("--hybrid", sw_hybrid, "Hybrid model file")->check(CLI::ExistingFile);
  sw->add_option("--data-driven", sw_dd, "Data-driven model file")->check(CLI::ExistingFile);
  sw->add_flag("--train", sw_train, "Train any missing model first");

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "Write the MUSIC pseudospectrum of one scene as CSV");
  add_common(sp);
  double sp_snr = 10.0;
  std::string sp_method = "none", sp_hybrid, sp_dd;
  sp->add_option("--snr", sp_snr, "SNR in dB")->capture_default_str();
  sp->add_option("--method", sp_method, "none, failed, hybrid or data-driven")->capture_default_str();
  sp->add_option("--hybrid", sp_hybrid, "Hybrid model file")->check(CLI::ExistingFile);
  sp->add_option("--data-driven", sp_dd, "Data-driven model file")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto t0 = std::chrono::steady_clock::now();

    if (*geo) {
      ArrayGeometry g = resolve(c).geometry();
      if (geo_mra > 0) g = mra_lookup(geo_mra);
      if (!geo_positions.empty()) g = ArrayGeometry(geo_positions);
      std::vector<int> failed;
      for (int i : geo_failed) {
        if (i < 1 || i > g.size()) throw Error("--failed: sensor indices are 1-based and must be <= M");
        failed.push_back(i - 1);
      }
      print_geometry(g.with_failures(failed), geo_json);
      return 0;
    }

    const auto cfg = resolve(c);
    fs::create_directories(c.out);

    if (*sim) {
      const auto geom = cfg.geometry();
      const auto failed = sim_failures ? cfg.test_failed_indices() : std::vector<int>{};
      const auto scene = make_trial_scene(cfg, geom, sim_snr, sim_trial);
      json header = {{"kind", sim_emit}, {"seed", scene.seed},      {"snr_db", sim_snr},
                     {"angles_deg", scene.angles_deg}, {"positions", geom.positions()},
                     {"failed", one_based(failed)}};
      std::vector<float> records;
      auto push = [&](cdouble v) {
        records.push_back(static_cast<float>(v.real()));
        records.push_back(static_cast<float>(v.imag()));
      };
      if (sim_emit == "snapshots") {
        Rng rng(scene.seed);
        draw_angles(cfg.sources, cfg.angle_lo, cfg.angle_hi, cfg.min_gap, rng);
        auto Y = simulate_snapshots(geom, SourceScene::equal_power(scene.angles_deg, sim_snr), cfg.snapshots, rng);
        Y = zero_failed_rows(Y, failed);
        header["shape"] = {Y.values.rows(), Y.values.cols()};
        header["layout"] = "column-major complex (re, im) float32";
        for (Eigen::Index j = 0; j < Y.values.cols(); ++j)
          for (Eigen::Index i = 0; i < Y.values.rows(); ++i) push(Y.values(i, j));
      } else {
        const auto R = failed.empty() ? scene.R : inject_failures(scene.R, failed);
        if (sim_emit == "covariance") {
          header["shape"] = {R.dim(), R.dim()};
          header["layout"] = "real part row-major, then imaginary part row-major, float32";
          for (double v : flatten_features(R)) records.push_back(static_cast<float>(v));
        } else {
          const auto z = redundancy_average(R, geom.with_failures(failed));
          header["M_v"] = z.M_v;
          header["layout"] = "lags -(M_v-1)..(M_v-1): (re, im, available) float32";
          for (Eigen::Index i = 0; i < z.z.size(); ++i) {
            push(z.z(i));
            records.push_back(z.available[static_cast<std::size_t>(i)] ? 1.0f : 0.0f);
          }
        }
      }
      const auto path = fs::path(c.out) / ("simulate_" + sim_emit + ".bin");
      save_records(header.dump(), records, path);
      finish(c, "simulate", cfg, {path.string()}, t0, {{"scene", header}});
      return 0;
    }

    if (*dat) {
      const auto v = variant_from_string(dat_variant);
      const auto data = generate_dataset(dataset_spec(cfg, v));
      const auto path = fs::path(c.out) / ("dataset_" + dat_variant + ".bin");
      save_dataset(data, path);
      finish(c, "dataset", cfg, {path.string()}, t0, {{"fingerprint", data.fingerprint()}, {"samples", data.size()}});
      return 0;
    }

    if (*trn) {
      const auto v = variant_from_string(trn_variant);
      std::optional<TrainingDataset> data;
      if (!trn_dataset.empty()) data = load_dataset(trn_dataset);
      TrainHistory h;
      const auto model = train_variant(cfg, v, &h, trn_offset, data ? &*data : nullptr);
      const auto mpath = fs::path(c.out) / ("model_" + trn_variant + ".bin");
      const auto hpath = fs::path(c.out) / ("history_" + trn_variant + ".csv");
      save_model(model, mpath);
      std::string csv = "epoch,train_loss,val_loss\n";
      char buf[96];
      std::snprintf(buf, sizeof buf, "0,,%.10g\n", h.initial_val_loss);
      csv += buf;
      for (std::size_t e = 0; e < h.val_loss.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g\n", e + 1, h.train_loss[e], h.val_loss[e]);
        csv += buf;
      }
      write_text(hpath, csv);
      std::printf("validation loss %.4g -> %.4g\n", h.initial_val_loss, h.val_loss.empty() ? h.initial_val_loss : h.val_loss.back());
      finish(c, "train", cfg, {mpath.string(), hpath.string()}, t0,
             {{"init_seed", model.init_seed}, {"train_seed", model.train_seed},
              {"dataset_fingerprint", model.dataset_fingerprint}});
      return 0;
    }

    if (*ev) {
      if (ev_emit == "spectrum") {
        const auto m = method_from_string(ev_method);
        auto one = cfg;
        one.methods = {m};
        const auto models = resolve_models(one, c, ev_hybrid, ev_dd, false);
        const auto seed = trial_seed(cfg.master_seed, ev_snr, ev_trial);
        const auto geom = cfg.geometry();
        const auto scene = make_trial_scene(cfg, geom, ev_snr, ev_trial);
        const auto R = method_covariance(m, scene.R, geom, cfg.test_failed_indices(), models);
        const auto spec = music_spectrum(R, cfg.sources, cfg.grid_step, virtual_ula(R.dim()));
        const auto path = fs::path(c.out) / ("spectrum_" + ev_method + "_" + snr_tag(ev_snr) + "dB.csv");
        write_text(path, spectrum_csv(spec));
        finish(c, "eval", cfg, {path.string()}, t0, {{"scene_seed", seed}, {"true_deg", scene.angles_deg}});
        return 0;
      }
      const auto models = resolve_models(cfg, c, ev_hybrid, ev_dd, false);
      json out = json::array();
      for (auto m : cfg.methods) {
        const auto r = run_trial(cfg, models, m, ev_snr, ev_trial);
        out.push_back({{"method", to_string(m)},
                       {"true_deg", r.true_deg},
                       {"estimated_deg", r.estimated_deg},
                       {"squared_error", r.squared_error},
                       {"resolution_failure", r.resolution_failure},
                       {"error", r.error ? json(r.error_message) : json(nullptr)}});
      }
      const auto path = fs::path(c.out) / ("eval_" + snr_tag(ev_snr) + "dB_q" + std::to_string(ev_trial) + ".json");
      write_text(path, out.dump(2) + "\n");
      std::cout << out.dump(2) << "\n";
      finish(c, "eval", cfg, {path.string()}, t0, {{"scene_seed", trial_seed(cfg.master_seed, ev_snr, ev_trial)}});
      return 0;
    }

    if (*sw) {
      const auto models = resolve_models(cfg, c, sw_hybrid, sw_dd, sw_train);
      std::cerr << "sweep: " << cfg.test_snr_db.size() << " SNRs [" << joined(cfg.test_snr_db) << "] x " << cfg.trials
                << " trials\n";
      const auto res = run_sweep(cfg, models);
      const auto rpath = fs::path(c.out) / "results.csv";
      const auto tpath = fs::path(c.out) / "trials.csv";
      write_text(rpath, results_csv(res));
      write_text(tpath, trials_csv(res));
      std::cout << results_csv(res);
      int errors = 0;
      for (const auto& r : res.rows) errors += r.n_err;
      finish(c, "sweep", cfg, {rpath.string(), tpath.string()}, t0, {{"trial_errors", errors}});
      return 0;
    }

    if (*sp) {
      const auto m = method_from_string(sp_method);
      auto one = cfg;
      one.methods = {m};
      const auto models = resolve_models(one, c, sp_hybrid, sp_dd, false);
      std::vector<double> truth;
      const auto spec = emit_spectrum(cfg, models, m, sp_snr, cfg.master_seed, &truth);
      const auto path = fs::path(c.out) / ("spectrum_" + sp_method + "_" + snr_tag(sp_snr) + "dB.csv");
      write_text(path, spectrum_csv(spec));
      finish(c, "spectrum", cfg, {path.string()}, t0, {{"true_deg", truth}});
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "sdoa: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
