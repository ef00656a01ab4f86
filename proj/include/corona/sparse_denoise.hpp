#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "corona/image.hpp"

namespace corona {

struct DenoiseParams {
  int patch_size = 8;     // p, power of two
  int stride = 2;         // s
  int group_size = 16;    // G
  double r_min = 0.7;     // minimum |r| for group membership
  double tau = 0.95;      // dictionary decorrelation threshold
  double prior_active = 0.5;  // lambda, prior probability of an active tap
  double q_floor = 0.05;  // refined taps below this are zeroed

  void validate() const;
};

// Block of one channel with its mean removed.
struct Patch {
  int x = 0;
  int y = 0;
  int channel = 0;
  Eigen::VectorXd values;  // row-major p*p block minus mean
  double mean = 0.0;
};

struct PatchGroup {
  int reference = 0;
  std::vector<int> members;        // reference first
  std::vector<double> correlations;  // |r| per member, 1 for the reference
  std::vector<double> weights;     // |r| normalized to sum 1
};

struct Dictionary {
  Eigen::MatrixXd atoms;  // M x N, unit-norm columns
  std::vector<int> kept;  // surviving column indices of the raw matrix
  double tau = 1.0;
  bool orthonormal = false;

  int rows() const { return static_cast<int>(atoms.rows()); }
  int cols() const { return static_cast<int>(atoms.cols()); }
};

struct SparseEstimate {
  Eigen::VectorXd coefficients;  // c, the unshrunk transform / pursuit coefficients
  Eigen::VectorXd theta;         // posterior-mean estimate
  Eigen::VectorXd active_prob;   // q, per-coefficient active-tap probability
  double slab_variance = 0.0;    // sigma_theta^2
  double noise_sigma = 0.0;

  // Expected number of active taps, sum(q).
  double expected_support() const { return active_prob.sum(); }
};

// Origins along one axis: 0, s, 2s, ... plus an edge-aligned final block.
std::vector<int> patch_origins(int extent, int patch_size, int stride);

std::vector<Patch> extract_patches(const Image& image, int patch_size, int stride,
                                   int channel = 0);

// Pearson correlation; 0 when either input has zero variance.
double correlation(std::span<const double> a, std::span<const double> b);

// Ranks candidates by |r| (descending, ties to lower index) given the |r| of
// every patch against the reference. Shared by every grouping path.
PatchGroup group_from_correlations(std::span<const double> abs_corr, int reference,
                                   int max_group, double r_min);

PatchGroup group_similar(std::span<const Patch> patches, int reference, int max_group,
                         double r_min);

// Orthonormal multilevel 2-D Haar basis for p x p blocks; columns are atoms.
Eigen::MatrixXd haar_basis(int patch_size);

// Greedy left-to-right scan keeping a column iff its |inner product| with every
// kept column is <= tau.
Dictionary decorrelate_dictionary(const Eigen::MatrixXd& raw, double tau);

// Bernoulli-Gaussian posterior probability that coefficient c is active.
double active_tap_probability(double c, double slab_variance, double noise_variance,
                              double prior_active);

// Coefficients come from the analysis transform for an orthonormal dictionary,
// otherwise from orthogonal matching pursuit stopped at ||r||^2 <= M sigma^2.
SparseEstimate sparse_estimate(const Eigen::VectorXd& patch, const Dictionary& dict,
                               double noise_sigma, double prior_active);

// estimates[i] belongs to group.members[i]. Averages active-tap probabilities
// with the group weights and re-shrinks the reference coefficients.
SparseEstimate collaborative_refine(const PatchGroup& group,
                                    std::span<const SparseEstimate> estimates,
                                    double q_floor);

// Inverse transform per patch, mean re-added, overlaps averaged, clamped to [0,255].
Image reconstruct(std::span<const SparseEstimate> estimates, std::span<const Patch> patches,
                  const Dictionary& dict, int width, int height);

// Single-channel pipeline: patches, grouping, estimation, refinement, reconstruction.
Image denoise_gray(const Image& noisy, double noise_sigma, const DenoiseParams& params);

// Each channel is the reference in turn; its groups gather co-located patches
// from all three channels.
Image denoise_color(const Image& noisy, double noise_sigma, const DenoiseParams& params);

// 1.4826 * median |finest diagonal Haar coefficient|.
double estimate_noise_sigma(const Image& image);

}  // namespace corona
