#include "corona/sparse_denoise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace corona {

void DenoiseParams::validate() const {
  if (patch_size < 2 || (patch_size & (patch_size - 1)) != 0) {
    throw std::invalid_argument("patch_size must be a power of two >= 2");
  }
  if (stride < 1 || stride > patch_size) throw std::invalid_argument("stride must lie in [1, p]");
  if (group_size < 1) throw std::invalid_argument("group_size must be >= 1");
  if (!(r_min >= 0.0 && r_min <= 1.0)) throw std::invalid_argument("r_min must lie in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
  if (!(prior_active > 0.0 && prior_active < 1.0)) {
    throw std::invalid_argument("prior_active must lie in (0, 1)");
  }
  if (!(q_floor >= 0.0 && q_floor <= 1.0)) throw std::invalid_argument("q_floor must lie in [0, 1]");
}

std::vector<int> patch_origins(int extent, int patch_size, int stride) {
  if (patch_size > extent) throw std::invalid_argument("patch larger than image");
  if (stride < 1 || stride > patch_size) throw std::invalid_argument("stride must lie in [1, p]");
  std::vector<int> origins;
  for (int o = 0; o + patch_size <= extent; o += stride) origins.push_back(o);
  if (origins.back() != extent - patch_size) origins.push_back(extent - patch_size);
  return origins;
}

std::vector<Patch> extract_patches(const Image& image, int patch_size, int stride, int channel) {
  if (channel < 0 || channel >= image.channels()) throw std::invalid_argument("bad channel");
  const std::vector<int> xs = patch_origins(image.width(), patch_size, stride);
  const std::vector<int> ys = patch_origins(image.height(), patch_size, stride);
  std::vector<Patch> patches;
  patches.reserve(xs.size() * ys.size());
  for (int y0 : ys) {
    for (int x0 : xs) {
      Patch p;
      p.x = x0;
      p.y = y0;
      p.channel = channel;
      p.values.resize(patch_size * patch_size);
      for (int dy = 0; dy < patch_size; ++dy) {
        for (int dx = 0; dx < patch_size; ++dx) {
          p.values[dy * patch_size + dx] = image.at(x0 + dx, y0 + dy, channel);
        }
      }
      p.mean = p.values.mean();
      p.values.array() -= p.mean;
      patches.push_back(std::move(p));
    }
  }
  return patches;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("correlation: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("correlation: need at least two samples");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

PatchGroup group_from_correlations(std::span<const double> abs_corr, int reference,
                                   int max_group, double r_min) {
  if (reference < 0 || reference >= static_cast<int>(abs_corr.size())) {
    throw std::invalid_argument("group: reference out of range");
  }
  if (max_group < 1) throw std::invalid_argument("group: max_group must be >= 1");
  std::vector<int> cand;
  for (int j = 0; j < static_cast<int>(abs_corr.size()); ++j) {
    if (j != reference && abs_corr[j] >= r_min) cand.push_back(j);
  }
  const auto take = std::min<std::size_t>(cand.size(), static_cast<std::size_t>(max_group - 1));
  auto better = [&](int a, int b) {
    return abs_corr[a] != abs_corr[b] ? abs_corr[a] > abs_corr[b] : a < b;
  };
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(),
                    better);

  PatchGroup g;
  g.reference = reference;
  g.members.push_back(reference);
  g.correlations.push_back(1.0);
  for (std::size_t i = 0; i < take; ++i) {
    g.members.push_back(cand[i]);
    g.correlations.push_back(std::min(1.0, abs_corr[cand[i]]));
  }
  const double total = std::accumulate(g.correlations.begin(), g.correlations.end(), 0.0);
  for (double r : g.correlations) g.weights.push_back(r / total);
  return g;
}

PatchGroup group_similar(std::span<const Patch> patches, int reference, int max_group,
                         double r_min) {
  if (reference < 0 || reference >= static_cast<int>(patches.size())) {
    throw std::invalid_argument("group_similar: reference out of range");
  }
  const Eigen::VectorXd& ref = patches[reference].values;
  std::vector<double> abs_corr(patches.size(), 0.0);
  for (std::size_t j = 0; j < patches.size(); ++j) {
    const Eigen::VectorXd& v = patches[j].values;
    abs_corr[j] = std::abs(correlation({ref.data(), static_cast<std::size_t>(ref.size())},
                                       {v.data(), static_cast<std::size_t>(v.size())}));
  }
  return group_from_correlations(abs_corr, reference, max_group, r_min);
}

Eigen::MatrixXd haar_basis(int patch_size) {
  if (patch_size < 1 || (patch_size & (patch_size - 1)) != 0) {
    throw std::invalid_argument("haar_basis: size must be a power of two");
  }
  const int p = patch_size;
  const double h = std::numbers::sqrt2 / 2.0;
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(p, p);
  for (int m = p; m >= 2; m /= 2) {
    Eigen::MatrixXd step = Eigen::MatrixXd::Identity(p, p);
    step.topLeftCorner(m, m).setZero();
    for (int i = 0; i < m / 2; ++i) {
      step(i, 2 * i) = h;
      step(i, 2 * i + 1) = h;
      step(m / 2 + i, 2 * i) = h;
      step(m / 2 + i, 2 * i + 1) = -h;
    }
    w = step * w;
  }
  // Rows of kron(W, W) analyse a row-major block; atoms are its transpose.
  Eigen::MatrixXd analysis(p * p, p * p);
  for (int u = 0; u < p; ++u) {
    for (int v = 0; v < p; ++v) {
      for (int y = 0; y < p; ++y) {
        for (int x = 0; x < p; ++x) analysis(u * p + v, y * p + x) = w(u, y) * w(v, x);
      }
    }
  }
  return analysis.transpose();
}

Dictionary decorrelate_dictionary(const Eigen::MatrixXd& raw, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    if (std::abs(raw.col(j).norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("decorrelate_dictionary: columns must be unit-norm");
    }
  }
  Dictionary dict;
  dict.tau = tau;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    bool keep = true;
    for (int k : dict.kept) {
      if (std::abs(raw.col(j).dot(raw.col(k))) > tau) {
        keep = false;
        break;
      }
    }
    if (keep) dict.kept.push_back(static_cast<int>(j));
  }
  dict.atoms.resize(raw.rows(), static_cast<Eigen::Index>(dict.kept.size()));
  for (std::size_t i = 0; i < dict.kept.size(); ++i) {
    dict.atoms.col(static_cast<Eigen::Index>(i)) = raw.col(dict.kept[i]);
  }
  if (dict.atoms.rows() == dict.atoms.cols()) {
    const Eigen::MatrixXd gram = dict.atoms.transpose() * dict.atoms;
    dict.orthonormal =
        (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-9;
  }
  return dict;
}

double active_tap_probability(double c, double slab_variance, double noise_variance,
                              double prior_active) {
  if (slab_variance <= 0.0 || prior_active <= 0.0) return 0.0;
  if (prior_active >= 1.0) return 1.0;
  if (noise_variance <= 0.0) return c != 0.0 ? 1.0 : 0.0;
  const double total = slab_variance + noise_variance;
  const double log_slab =
      std::log(prior_active) - 0.5 * std::log(total) - c * c / (2.0 * total);
  const double log_spike =
      std::log1p(-prior_active) - 0.5 * std::log(noise_variance) - c * c / (2.0 * noise_variance);
  return 1.0 / (1.0 + std::exp(log_spike - log_slab));
}

namespace {

Eigen::VectorXd matching_pursuit(const Eigen::VectorXd& y, const Eigen::MatrixXd& atoms,
                                 double noise_sigma) {
  const Eigen::Index m = atoms.rows();
  const Eigen::Index n = atoms.cols();
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(n);
  const double y_norm = y.norm();
  if (y_norm == 0.0) return coeffs;
  const double stop = noise_sigma > 0.0
                          ? static_cast<double>(m) * noise_sigma * noise_sigma
                          : std::pow(1e-12 * std::max(1.0, y_norm), 2);
  const Eigen::Index max_iter = std::min(m, n);

  std::vector<Eigen::Index> support;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Eigen::VectorXd residual = y;
  Eigen::VectorXd sol;
  while (static_cast<Eigen::Index>(support.size()) < max_iter &&
         residual.squaredNorm() > stop) {
    const Eigen::VectorXd proj = atoms.transpose() * residual;
    Eigen::Index best = -1;
    double best_val = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if (std::abs(proj[j]) > best_val) {
        best_val = std::abs(proj[j]);
        best = j;
      }
    }
    if (best < 0 || best_val <= 1e-14 * y_norm) break;
    used[static_cast<std::size_t>(best)] = true;
    support.push_back(best);

    Eigen::MatrixXd sub(m, static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = atoms.col(support[i]);
    sol = sub.colPivHouseholderQr().solve(y);
    residual = y - sub * sol;
  }
  for (std::size_t i = 0; i < support.size(); ++i) coeffs[support[i]] = sol[static_cast<Eigen::Index>(i)];
  return coeffs;
}

double population_variance(const Eigen::VectorXd& v) {
  if (v.size() == 0) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size());
}

SparseEstimate refine_core(const SparseEstimate& ref, std::span<const double> weights,
                           std::span<const SparseEstimate* const> members, double q_floor) {
  SparseEstimate out = ref;
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(ref.active_prob.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i]->active_prob.size() != pooled.size()) {
      throw std::invalid_argument("collaborative_refine: estimates use different dictionaries");
    }
    pooled += weights[i] * members[i]->active_prob;
  }
  const double noise_var = ref.noise_sigma * ref.noise_sigma;
  const double shrink =
      ref.slab_variance > 0.0 ? ref.slab_variance / (ref.slab_variance + noise_var) : 0.0;
  for (Eigen::Index j = 0; j < pooled.size(); ++j) {
    pooled[j] = std::clamp(pooled[j], 0.0, 1.0);
    out.theta[j] = pooled[j] < q_floor ? 0.0 : pooled[j] * ref.coefficients[j] * shrink;
  }
  out.active_prob = std::move(pooled);
  return out;
}

}  // namespace

SparseEstimate sparse_estimate(const Eigen::VectorXd& patch, const Dictionary& dict,
                               double noise_sigma, double prior_active) {
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("sparse_estimate: sigma must be >= 0");
  if (patch.size() != dict.atoms.rows()) {
    throw std::invalid_argument("sparse_estimate: patch length does not match dictionary");
  }
  SparseEstimate est;
  est.noise_sigma = noise_sigma;
  est.coefficients = dict.orthonormal ? Eigen::VectorXd(dict.atoms.transpose() * patch)
                                      : matching_pursuit(patch, dict.atoms, noise_sigma);
  const double noise_var = noise_sigma * noise_sigma;
  est.slab_variance = std::max(0.0, population_variance(est.coefficients) - noise_var);

  const Eigen::Index n = est.coefficients.size();
  est.active_prob = Eigen::VectorXd::Zero(n);
  est.theta = Eigen::VectorXd::Zero(n);
  if (est.slab_variance <= 0.0) return est;
  const double shrink = est.slab_variance / (est.slab_variance + noise_var);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double c = est.coefficients[j];
    const double q = active_tap_probability(c, est.slab_variance, noise_var, prior_active);
    est.active_prob[j] = q;
    est.theta[j] = q * c * shrink;
  }
  return est;
}

SparseEstimate collaborative_refine(const PatchGroup& group,
                                    std::span<const SparseEstimate> estimates, double q_floor) {
  if (estimates.size() != group.members.size() || group.weights.size() != group.members.size()) {
    throw std::invalid_argument("collaborative_refine: one estimate and weight per member");
  }
  const auto it = std::find(group.members.begin(), group.members.end(), group.reference);
  if (it == group.members.end()) {
    throw std::invalid_argument("collaborative_refine: reference missing from group");
  }
  const SparseEstimate& ref = estimates[static_cast<std::size_t>(it - group.members.begin())];
  // Nothing to pool for a lone patch, and a noiseless observation is exact.
  if (group.members.size() == 1 || ref.noise_sigma == 0.0) return ref;
  std::vector<const SparseEstimate*> ptrs;
  for (const SparseEstimate& e : estimates) ptrs.push_back(&e);
  return refine_core(ref, group.weights, ptrs, q_floor);
}

Image reconstruct(std::span<const SparseEstimate> estimates, std::span<const Patch> patches,
                  const Dictionary& dict, int width, int height) {
  if (estimates.size() != patches.size()) {
    throw std::invalid_argument("reconstruct: one estimate per patch");
  }
  const int p = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dict.rows()))));
  Image sum(width, height, 1);
  Image count(width, height, 1);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const Eigen::VectorXd block = dict.atoms * estimates[i].theta;
    const Patch& patch = patches[i];
    for (int dy = 0; dy < p; ++dy) {
      for (int dx = 0; dx < p; ++dx) {
        sum.at(patch.x + dx, patch.y + dy) += block[dy * p + dx] + patch.mean;
        count.at(patch.x + dx, patch.y + dy) += 1.0;
      }
    }
  }
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (count.data()[i] == 0.0) throw std::invalid_argument("reconstruct: uncovered pixel");
    sum.data()[i] /= count.data()[i];
  }
  sum.clamp();
  return sum;
}

namespace {

constexpr Eigen::Index kCorrelationBlock = 128;

Image denoise_channels(const Image& noisy, double noise_sigma, const DenoiseParams& params,
                       bool pool_channels) {
  params.validate();
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  const int p = params.patch_size;
  if (noisy.width() < p || noisy.height() < p) {
    throw std::invalid_argument("image smaller than the patch size");
  }
  if (noise_sigma == 0.0) {
    // nothing to remove; skip the round-off of a full transform pass
    Image out = noisy;
    out.clamp();
    return out;
  }
  const Dictionary dict = decorrelate_dictionary(haar_basis(p), params.tau);
  const int channels = noisy.channels();

  std::vector<std::vector<Patch>> patches(channels);
  std::vector<std::vector<SparseEstimate>> estimates(channels);
  for (int c = 0; c < channels; ++c) {
    patches[c] = extract_patches(noisy, p, params.stride, c);
    estimates[c].reserve(patches[c].size());
    for (const Patch& patch : patches[c]) {
      estimates[c].push_back(sparse_estimate(patch.values, dict, noise_sigma, params.prior_active));
    }
  }
  const auto count = static_cast<Eigen::Index>(patches[0].size());
  const int pool = pool_channels ? channels : 1;

  Image out(noisy.width(), noisy.height(), channels);
  std::vector<SparseEstimate> refined(patches[0].size());
  std::vector<double> abs_corr(patches[0].size());
  std::vector<double> weights;
  std::vector<const SparseEstimate*> members;

  for (int ref_ch = 0; ref_ch < channels; ++ref_ch) {
    // Unit-norm mean-removed rows; their dot product is the Pearson correlation.
    Eigen::MatrixXd unit(count, p * p);
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eigen::VectorXd& v = patches[ref_ch][i].values;
      const double norm = v.norm();
      unit.row(i) = norm > 0.0 ? Eigen::VectorXd(v / norm) : Eigen::VectorXd::Zero(v.size());
    }
    for (Eigen::Index start = 0; start < count; start += kCorrelationBlock) {
      const Eigen::Index rows = std::min(kCorrelationBlock, count - start);
      const Eigen::MatrixXd block = unit.middleRows(start, rows) * unit.transpose();
      for (Eigen::Index r = 0; r < rows; ++r) {
        const int ref = static_cast<int>(start + r);
        for (Eigen::Index j = 0; j < count; ++j) {
          abs_corr[j] = std::min(1.0, std::abs(block(r, j)));
        }
        const PatchGroup group =
            group_from_correlations(abs_corr, ref, params.group_size, params.r_min);
        const SparseEstimate& own = estimates[ref_ch][ref];
        if (group.members.size() == 1 || noise_sigma == 0.0) {
          refined[ref] = own;
          continue;
        }
        weights.clear();
        members.clear();
        for (std::size_t m = 0; m < group.members.size(); ++m) {
          for (int k = 0; k < pool; ++k) {
            const int ch = pool_channels ? (ref_ch + k) % channels : ref_ch;
            members.push_back(&estimates[ch][group.members[m]]);
            weights.push_back(group.weights[m] / pool);
          }
        }
        refined[ref] = refine_core(own, weights, members, params.q_floor);
      }
    }
    out.set_channel(ref_ch,
                    reconstruct(refined, patches[ref_ch], dict, noisy.width(), noisy.height()));
  }
  return out;
}

}  // namespace

Image denoise_gray(const Image& noisy, double noise_sigma, const DenoiseParams& params) {
  if (noisy.channels() != 1) throw std::invalid_argument("denoise_gray: expected one channel");
  return denoise_channels(noisy, noise_sigma, params, false);
}

Image denoise_color(const Image& noisy, double noise_sigma, const DenoiseParams& params) {
  if (noisy.channels() != 3) throw std::invalid_argument("denoise_color: expected three channels");
  return denoise_channels(noisy, noise_sigma, params, true);
}

double estimate_noise_sigma(const Image& image) {
  std::vector<double> diag;
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y + 1 < image.height(); y += 2) {
      for (int x = 0; x + 1 < image.width(); x += 2) {
        const double v = image.at(x, y, c) - image.at(x + 1, y, c) - image.at(x, y + 1, c) +
                         image.at(x + 1, y + 1, c);
        diag.push_back(std::abs(v) / 2.0);
      }
    }
  }
  if (diag.empty()) throw std::invalid_argument("estimate_noise_sigma: image too small");
  auto mid = diag.begin() + static_cast<std::ptrdiff_t>(diag.size() / 2);
  std::nth_element(diag.begin(), mid, diag.end());
  return 1.4826 * *mid;
}

}  // namespace corona
