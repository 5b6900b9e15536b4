#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "proxdiff/bench/csv.hpp"
#include "proxdiff/bench/experiment.hpp"
#include "proxdiff/denoise/bilevel.hpp"

namespace {

using proxdiff::ExperimentSpec;

int run_bench(const ExperimentSpec& spec) {
  try {
    proxdiff::ErrorCurves curves = proxdiff::run_error_curves(spec);
    proxdiff::emit_csv(curves, spec.out_path);
    std::cout << "wrote " << spec.out_path << " (" << curves.iters + 1 << " rows)\n";
    return 0;
  } catch (const proxdiff::DegenerateInstanceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

int run_rates(const std::string& path, double floor) {
  proxdiff::ErrorCurves curves = proxdiff::read_csv(path);
  std::vector<proxdiff::RateReport> reports = proxdiff::rate_table(curves, floor);
  std::printf("%-14s %12s %8s %8s %10s\n", "curve", "slope/iter", "from", "to", "r^2");
  for (int i = 0; i < proxdiff::ErrorCurves::kCount; ++i) {
    const auto& r = reports[static_cast<std::size_t>(i)];
    std::printf("%-14s %12.6f %8d %8d %10.6f\n", proxdiff::ErrorCurves::kNames[static_cast<std::size_t>(i)],
                r.slope, r.window_start, r.window_end, r.r_squared);
  }
  return 0;
}

std::vector<proxdiff::denoise::Image> load_image_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".ppm" || ext == ".pgm") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<proxdiff::denoise::Image> images;
  images.reserve(paths.size());
  for (const auto& p : paths) images.push_back(proxdiff::denoise::load_ppm(p));
  return images;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"derivatives of composite convex solution mappings: rate bench and "
               "bilevel denoising"};
  app.require_subcommand(1);

  // ---- bench ----
  ExperimentSpec spec;
  std::string problem_name = "lasso";
  std::string config_path;
  auto* bench = app.add_subcommand("bench", "generate the ten error curves as CSV");
  auto* opt_problem = bench->add_option("--problem", problem_name, "lasso | group_lasso");
  auto* opt_m = bench->add_option("--m", spec.m, "rows of the design matrix");
  auto* opt_n = bench->add_option("--n", spec.n, "columns of the design matrix");
  auto* opt_l = bench->add_option("--l", spec.l, "target columns (group problem)");
  auto* opt_lambda =
      bench->add_option("--lambda", spec.lambda, "regularization weight; <= 0 selects automatically");
  auto* opt_seed = bench->add_option("--seed", spec.seed, "instance seed");
  auto* opt_iters = bench->add_option("--iters", spec.iters, "iteration count K");
  auto* opt_q = bench->add_option("--q", spec.q, "momentum parameter");
  auto* opt_out = bench->add_option("--out", spec.out_path, "output CSV path");
  bench->add_option("--config", config_path, "JSON file mirroring the flags; flags win");

  // ---- rates ----
  std::string rates_path;
  double rates_floor = 1e-11;
  auto* rates = app.add_subcommand("rates", "fit log-linear rates of a curves CSV");
  rates->add_option("csv", rates_path, "curves CSV from `bench`")->required();
  rates->add_option("--floor", rates_floor, "error floor for the fitting window");

  // ---- denoise-train ----
  proxdiff::denoise::TrainConfig train_cfg;
  std::string data_dir, theta_out = "theta.csv", log_out = "loss.csv";
  bool paper_scale = false;
  auto* dtrain = app.add_subcommand("denoise-train", "learn denoising filter weights");
  dtrain->add_option("--data", data_dir, "directory of ground-truth .ppm/.pgm images")->required();
  auto* opt_epochs = dtrain->add_option("--epochs", train_cfg.epochs, "training epochs");
  auto* opt_inner = dtrain->add_option("--inner-iters", train_cfg.inner_iters, "dual solver iterations");
  auto* opt_filters = dtrain->add_option("--filters", train_cfg.n_filters, "number of learned filters");
  dtrain->add_option("--seed", train_cfg.seed, "seed for noise, shuffling and weight init");
  dtrain->add_option("--noise-std", train_cfg.noise_std, "noise standard deviation");
  dtrain->add_option("--lr", train_cfg.lr, "initial learning rate");
  dtrain->add_option("--momentum", train_cfg.momentum, "velocity decay");
  dtrain->add_option("--q", train_cfg.q, "momentum parameter of the inner solver");
  dtrain->add_option("--out", theta_out, "weight matrix CSV");
  dtrain->add_option("--log", log_out, "per-step loss log CSV");
  dtrain->add_flag("--paper-scale", paper_scale,
                   "full-size defaults (30 epochs, 500 inner iterations, 24 filters); "
                   "runtime is minutes rather than seconds");

  // ---- denoise-apply ----
  std::string theta_in, img_in, img_out;
  int apply_iters = 500;
  double apply_q = 5.0;
  auto* dapply = app.add_subcommand("denoise-apply", "denoise one image with trained weights");
  dapply->add_option("--theta", theta_in, "weight matrix CSV")->required();
  dapply->add_option("--in", img_in, "noisy input image (.ppm/.pgm)")->required();
  dapply->add_option("--out", img_out, "recovered output image")->required();
  dapply->add_option("--inner-iters", apply_iters, "dual solver iterations");
  dapply->add_option("--q", apply_q, "momentum parameter");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench->parsed()) {
      nlohmann::json cfg = nlohmann::json::object();
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
          std::cerr << "error: cannot open config '" << config_path << "'\n";
          return 1;
        }
        cfg = nlohmann::json::parse(in);
      }
      auto take = [&cfg](const CLI::Option* opt, const char* key, auto& target) {
        if (opt->count() == 0 && cfg.contains(key))
          target = cfg[key].template get<std::decay_t<decltype(target)>>();
      };
      take(opt_problem, "problem", problem_name);
      take(opt_m, "m", spec.m);
      take(opt_n, "n", spec.n);
      take(opt_l, "l", spec.l);
      take(opt_lambda, "lambda", spec.lambda);
      take(opt_seed, "seed", spec.seed);
      take(opt_iters, "iters", spec.iters);
      take(opt_q, "q", spec.q);
      take(opt_out, "out", spec.out_path);
      auto unset = [&cfg](const CLI::Option* opt, const char* key) {
        return opt->count() == 0 && !cfg.contains(key);
      };
      if (problem_name == "lasso") {
        spec.problem = ExperimentSpec::Problem::kLasso;
      } else if (problem_name == "group_lasso") {
        spec.problem = ExperimentSpec::Problem::kGroupLasso;
        // Desk defaults for the group problem differ from the vector one.
        if (unset(opt_n, "n")) spec.n = 10;
        if (unset(opt_l, "l")) spec.l = 8;
        if (unset(opt_iters, "iters")) spec.iters = 800;
      } else {
        std::cerr << "error: unknown problem '" << problem_name << "'\n";
        return 1;
      }
      if (spec.out_path.empty()) spec.out_path = "curves.csv";
      return run_bench(spec);
    }
    if (rates->parsed()) return run_rates(rates_path, rates_floor);
    if (dtrain->parsed()) {
      if (paper_scale) {
        if (opt_epochs->count() == 0) train_cfg.epochs = 30;
        if (opt_inner->count() == 0) train_cfg.inner_iters = 500;
        if (opt_filters->count() == 0) train_cfg.n_filters = 24;
      }
      std::vector<proxdiff::denoise::Image> grounds = load_image_dir(data_dir);
      if (grounds.empty()) {
        std::cerr << "error: no .ppm/.pgm images in '" << data_dir << "'\n";
        return 1;
      }
      auto dataset = proxdiff::denoise::make_noisy_dataset(grounds, train_cfg.noise_std,
                                                           train_cfg.seed);
      proxdiff::denoise::TrainResult result = proxdiff::denoise::train(dataset, train_cfg);
      proxdiff::denoise::save_theta_csv(result.theta, theta_out);
      proxdiff::denoise::write_train_log(result.log, log_out);
      std::cout << "epoch mean loss:";
      for (double v : result.epoch_mean_loss) std::printf(" %.6g", v);
      std::cout << "\nwrote " << theta_out << " and " << log_out << '\n';
      return 0;
    }
    if (dapply->parsed()) {
      proxdiff::DenseMatrix theta = proxdiff::denoise::load_theta_csv(theta_in);
      proxdiff::denoise::FilterBank bank(proxdiff::denoise::dct_basis_5x5(), theta);
      proxdiff::denoise::Image noisy = proxdiff::denoise::load_ppm(img_in);
      proxdiff::denoise::DualSolveOptions options;
      options.iters = apply_iters;
      options.q = apply_q;
      proxdiff::denoise::DenoiseResult res = proxdiff::denoise::denoise_dual_apg(bank, noisy, options);
      proxdiff::denoise::save_ppm(proxdiff::denoise::clamp01(res.denoised), img_out);
      std::cout << "wrote " << img_out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
