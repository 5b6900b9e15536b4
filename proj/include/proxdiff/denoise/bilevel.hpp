#ifndef PROXDIFF_DENOISE_BILEVEL_HPP
#define PROXDIFF_DENOISE_BILEVEL_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "proxdiff/denoise/dual.hpp"

namespace proxdiff::denoise {

struct BilevelGradResult {
  DenseMatrix grad;  // d loss / d weights, N_f x N_b
  double loss = 0.0;
  Image denoised;
  bool fpad_converged = false;
  int fpad_iters = 0;
};

// Gradient of J(theta) = 1/2 || denoised(theta) - ground ||^2 through the
// dual solve: the explicit dependence of the adjoint operator on the weights
// plus the implicit dependence of the dual point, pulled back by the frozen
// reverse recursion at the solve's own final iterate.
BilevelGradResult bilevel_grad(const FilterBank& bank, const Image& noisy, const Image& ground,
                               int inner_iters, int fpad_iters, double tol, double q = 5.0);

struct TrainConfig {
  int epochs = 5;
  int inner_iters = 200;
  double q = 5.0;
  double lr = 1e-4;        // tau_l = lr / (floor(l/4) + 1)
  double momentum = 0.75;  // velocity = momentum * velocity + grad
  std::uint64_t seed = 0;
  double noise_std = 40.0 / 255.0;
  int n_filters = 6;
  double fpad_tol = 1e-10;
  int fpad_iters = 0;  // 0: same as inner_iters
  std::function<void(int, const FilterBank&)> epoch_callback;  // after each epoch
};

struct TrainLogRow {
  int epoch = 0;
  int step = 0;
  int image_id = 0;
  double loss = 0.0;
  double psnr_db = 0.0;
};

struct TrainResult {
  DenseMatrix theta;  // n_filters x 24
  std::vector<TrainLogRow> log;
  std::vector<double> epoch_mean_loss;
};

// Stochastic gradient descent with momentum over the dataset of
// (noisy, ground) pairs, reshuffled every epoch; weights start uniform on
// [0, 0.01). Deterministic per seed.
TrainResult train(const std::vector<std::pair<Image, Image>>& dataset, const TrainConfig& cfg);

// Adds Gaussian noise of the given standard deviation to each image, once;
// deterministic per seed and image index.
std::vector<std::pair<Image, Image>> make_noisy_dataset(const std::vector<Image>& grounds,
                                                        double noise_std, std::uint64_t seed);

// Piecewise-constant test patch with a few random rectangles; deterministic.
Image synthetic_patch(int width, int height, int channels, std::uint64_t seed);

// Weight matrix persistence (one row per filter, 17 significant digits) and
// the training log (`epoch,step,image_id,loss,psnr`).
void save_theta_csv(const DenseMatrix& theta, const std::string& path);
DenseMatrix load_theta_csv(const std::string& path);
void write_train_log(const std::vector<TrainLogRow>& log, const std::string& path);

}  // namespace proxdiff::denoise

#endif
