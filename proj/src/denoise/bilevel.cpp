#include "proxdiff/denoise/bilevel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "proxdiff/autodiff/fpad_core.hpp"
#include "proxdiff/core/rng.hpp"

namespace proxdiff::denoise {

namespace {

double field_slice_dot(const Field& field, int f, const Image& img) {
  double s = 0.0;
  for (int c = 0; c < field.channels; ++c)
    for (int y = 0; y < field.height; ++y)
      for (int x = 0; x < field.width; ++x) s += field.at(x, y, c, f) * img.at(x, y, c);
  return s;
}

Field field_like(const DualAnchor& anchor, Vec values) {
  Field f;
  f.width = anchor.p.width;
  f.height = anchor.p.height;
  f.channels = anchor.p.channels;
  f.n_filters = anchor.p.n_filters;
  f.values = std::move(values);
  return f;
}

// Frozen linearization of the projected dual iteration at the anchor. The
// projection does not depend on the weights, so the whole parameter pathway
// runs through the data-term gradient.
FrozenOps<DenseMatrix> dual_frozen_ops(const FilterBank& bank, const Image& noisy,
                                       const DualAnchor& anchor) {
  FrozenOps<DenseMatrix> ops;
  ops.dim = static_cast<int>(anchor.p.size());
  ops.alpha = anchor.alpha;
  ops.beta = anchor.beta;

  // Caches shared by the closures: the primal-space residual q = A* p - x,
  // the basis responses of q, and the basis adjoints of each dual slice.
  struct Cache {
    FilterBank bank;
    Image noisy;
    DualAnchor anchor;
    Image q;
    std::vector<Image> basis_of_q;               // B_s q
    std::vector<std::vector<Image>> basis_adj_p;  // [f][s] = B_s^* p_f
  };
  auto cache = std::make_shared<Cache>(Cache{bank, noisy, anchor, Image{}, {}, {}});
  cache->q = conv_adjoint(bank, anchor.p);
  axpy(cache->q.values, -1.0, noisy.values);
  const int n_f = bank.n_filters();
  const int n_b = bank.n_basis();
  cache->basis_of_q.reserve(static_cast<std::size_t>(n_b));
  for (int s = 0; s < n_b; ++s)
    cache->basis_of_q.push_back(kernel_apply_image(bank.basis[static_cast<std::size_t>(s)], cache->q));
  cache->basis_adj_p.resize(static_cast<std::size_t>(n_f));
  for (int f = 0; f < n_f; ++f) {
    Image slice = Image::zeros(anchor.p.width, anchor.p.height, anchor.p.channels);
    for (int c = 0; c < anchor.p.channels; ++c)
      for (int y = 0; y < anchor.p.height; ++y)
        for (int x = 0; x < anchor.p.width; ++x) slice.at(x, y, c) = anchor.p.at(x, y, c, f);
    for (int s = 0; s < n_b; ++s)
      cache->basis_adj_p[static_cast<std::size_t>(f)].push_back(
          kernel_adjoint_image(bank.basis[static_cast<std::size_t>(s)], slice));
  }

  ops.prox_jvp = [cache](const Vec& v) {
    Field vf = field_like(cache->anchor, v);
    return projection_jvp(cache->anchor, vf).values;
  };
  ops.prox_vjp = ops.prox_jvp;  // pixel blocks are symmetric
  ops.hvp = [cache](const Vec& v) {
    Field vf = field_like(cache->anchor, v);
    Image adj = conv_adjoint(cache->bank, vf);
    return conv_apply(cache->bank, adj).values;
  };
  ops.cross_jvp = [cache](const DenseMatrix& dtheta) {
    // d/dtheta of A (A* p - x) along dtheta: Adot q + A (Adot* p).
    FilterBank dbank(cache->bank.basis, dtheta);
    Field out = conv_apply(dbank, cache->q);
    Image adj = conv_adjoint(dbank, cache->anchor.p);
    axpy(out.values, 1.0, conv_apply(cache->bank, adj).values);
    return out.values;
  };
  ops.cross_vjp_acc = [cache](const Vec& vbar, DenseMatrix& acc, double c) {
    Field vf = field_like(cache->anchor, vbar);
    Image adj_v = conv_adjoint(cache->bank, vf);
    for (int f = 0; f < cache->bank.n_filters(); ++f) {
      for (int s = 0; s < cache->bank.n_basis(); ++s) {
        const double term1 = field_slice_dot(vf, f, cache->basis_of_q[static_cast<std::size_t>(s)]);
        const double term2 =
            dot(adj_v.values, cache->basis_adj_p[static_cast<std::size_t>(f)][static_cast<std::size_t>(s)].values);
        acc.at(f, s) += c * (term1 + term2);
      }
    }
  };
  ops.pack_zero = [n_f, n_b]() { return DenseMatrix(n_f, n_b); };
  ops.pack_bytes = [](const DenseMatrix& m) { return m.entries().size() * sizeof(double); };
  return ops;
}

}  // namespace

BilevelGradResult bilevel_grad(const FilterBank& bank, const Image& noisy, const Image& ground,
                               int inner_iters, int fpad_iters, double tol, double q) {
  if (noisy.width != ground.width || noisy.height != ground.height ||
      noisy.channels != ground.channels)
    throw std::invalid_argument("bilevel_grad: image shape mismatch");

  DualSolveOptions options;
  options.iters = inner_iters;
  options.q = q;
  DenoiseResult solve = denoise_dual_apg(bank, noisy, options);

  BilevelGradResult result;
  result.denoised = solve.denoised;
  Image residual = solve.denoised;
  axpy(residual.values, -1.0, ground.values);
  result.loss = 0.5 * dot(residual.values, residual.values);
  result.grad = DenseMatrix(bank.n_filters(), bank.n_basis());

  if (solve.alpha == 0.0) {
    // Zero operator: the explicit pathway vanishes with p = 0 and there is
    // no implicit dependence to pull back.
    result.fpad_converged = true;
    return result;
  }

  // Explicit pathway: d/dtheta of -A*(theta) p at fixed p.
  for (int s = 0; s < bank.n_basis(); ++s) {
    const Image basis_r = kernel_apply_image(bank.basis[static_cast<std::size_t>(s)], residual);
    for (int f = 0; f < bank.n_filters(); ++f)
      result.grad.at(f, s) = -field_slice_dot(solve.dual, f, basis_r);
  }

  // Implicit pathway: cotangent on the dual point is -A residual.
  FrozenOps<DenseMatrix> ops = dual_frozen_ops(bank, noisy, solve.anchor);
  Field pbar = conv_apply(bank, residual);
  scale(pbar.values, -1.0);
  FpadReverseResult<DenseMatrix> rev =
      fpad_reverse_core(ops, pbar.values, tol, fpad_iters > 0 ? fpad_iters : inner_iters);
  result.fpad_converged = rev.converged;
  result.fpad_iters = rev.iters;
  result.grad.add_scaled(rev.u_tilde, 1.0);
  return result;
}

TrainResult train(const std::vector<std::pair<Image, Image>>& dataset, const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  const std::vector<Kernel> basis = dct_basis_5x5();
  const int n_b = static_cast<int>(basis.size());

  Rng theta_rng(cfg.seed, RngStream::kThetaInit);
  DenseMatrix theta(cfg.n_filters, n_b,
                    theta_rng.uniform_vec(static_cast<std::size_t>(cfg.n_filters) * n_b, 0.0, 0.01));

  TrainResult result;
  DenseMatrix velocity(cfg.n_filters, n_b);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(cfg.seed, RngStream::kShuffleBase, static_cast<std::uint64_t>(epoch));
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(shuffle_rng.uniform_int(i + 1))]);

    const double tau = cfg.lr / static_cast<double>(epoch / 4 + 1);
    double loss_sum = 0.0;
    for (std::size_t step = 0; step < order.size(); ++step) {
      const int id = order[step];
      const auto& [noisy, ground] = dataset[static_cast<std::size_t>(id)];
      FilterBank bank(basis, theta);
      BilevelGradResult g = bilevel_grad(bank, noisy, ground, cfg.inner_iters,
                                         cfg.fpad_iters > 0 ? cfg.fpad_iters : cfg.inner_iters,
                                         cfg.fpad_tol, cfg.q);
      velocity *= cfg.momentum;
      velocity.add_scaled(g.grad, 1.0);
      theta.add_scaled(velocity, -tau);

      loss_sum += g.loss;
      TrainLogRow row;
      row.epoch = epoch;
      row.step = static_cast<int>(step);
      row.image_id = id;
      row.loss = g.loss;
      row.psnr_db = psnr(clamp01(g.denoised), ground).db;
      result.log.push_back(row);
    }
    result.epoch_mean_loss.push_back(loss_sum / static_cast<double>(order.size()));
    if (cfg.epoch_callback) cfg.epoch_callback(epoch, FilterBank(basis, theta));
  }
  result.theta = std::move(theta);
  return result;
}

std::vector<std::pair<Image, Image>> make_noisy_dataset(const std::vector<Image>& grounds,
                                                        double noise_std, std::uint64_t seed) {
  std::vector<std::pair<Image, Image>> out;
  out.reserve(grounds.size());
  for (std::size_t i = 0; i < grounds.size(); ++i) {
    Rng rng(seed, RngStream::kNoise, i);
    Image noisy = grounds[i];
    for (double& v : noisy.values) v += rng.normal(0.0, noise_std);
    out.emplace_back(std::move(noisy), grounds[i]);
  }
  return out;
}

Image synthetic_patch(int width, int height, int channels, std::uint64_t seed) {
  Rng rng(seed, RngStream::kGeneric);
  Image img = Image::zeros(width, height, channels);
  for (int c = 0; c < channels; ++c) {
    const double background = rng.uniform(0.15, 0.85);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) img.at(x, y, c) = background;
  }
  const int n_shapes = 3 + rng.uniform_int(3);
  for (int s = 0; s < n_shapes; ++s) {
    const int x0 = rng.uniform_int(width);
    const int y0 = rng.uniform_int(height);
    const int w = 2 + rng.uniform_int(std::max(width / 2, 1));
    const int h = 2 + rng.uniform_int(std::max(height / 2, 1));
    const double level = rng.uniform(0.05, 0.95);
    for (int y = y0; y < std::min(y0 + h, height); ++y)
      for (int x = x0; x < std::min(x0 + w, width); ++x)
        for (int c = 0; c < channels; ++c) img.at(x, y, c) = level;
  }
  return img;
}

void save_theta_csv(const DenseMatrix& theta, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_theta_csv: cannot open '" + path + "'");
  char buf[32];
  for (int f = 0; f < theta.rows(); ++f) {
    for (int s = 0; s < theta.cols(); ++s) {
      std::snprintf(buf, sizeof(buf), "%.16e", theta.at(f, s));
      out << (s ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("save_theta_csv: write to '" + path + "' failed");
}

DenseMatrix load_theta_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_theta_csv: cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_theta_csv: empty file '" + path + "'");
  const std::size_t cols = rows[0].size();
  Vec entries;
  for (const auto& row : rows) {
    if (row.size() != cols) throw std::runtime_error("load_theta_csv: ragged rows in '" + path + "'");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return DenseMatrix(static_cast<int>(rows.size()), static_cast<int>(cols), std::move(entries));
}

void write_train_log(const std::vector<TrainLogRow>& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_train_log: cannot open '" + path + "'");
  out << "epoch,step,image_id,loss,psnr\n";
  char buf[32];
  for (const TrainLogRow& row : log) {
    out << row.epoch << ',' << row.step << ',' << row.image_id;
    std::snprintf(buf, sizeof(buf), "%.16e", row.loss);
    out << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.16e", row.psnr_db);
    out << ',' << buf << '\n';
  }
  if (!out) throw std::runtime_error("write_train_log: write to '" + path + "' failed");
}

}  // namespace proxdiff::denoise
