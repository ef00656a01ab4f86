#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corona/protocol.hpp"
#include "corona/quality_metrics.hpp"
#include "corona/radio_energy.hpp"
#include "corona/sparse_denoise.hpp"
#include "corona/topology.hpp"

namespace corona {

struct ProbeConfig {
  int rows = 32;                     // M
  int sparsity = 4;                  // nonzeros per synthetic signal
  std::vector<int> atoms{64, 128, 256};  // N values
  int repeats = 5;
  double noise_sigma = 0.01;
};

// Flat "key = value" configuration; '#' starts a comment. Keys are listed in
// config_keys() and README.md.
struct ExperimentConfig {
  NetworkConfig network;
  RadioParams radio = RadioParams::defaults();
  ProtocolParams protocol;
  int max_rounds = 8000;
  std::vector<Protocol> protocols{Protocol::proposed, Protocol::leach};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  DenoiseParams denoise;
  int region_bins = 64;
  int min_component = 32;  // T_cc
  std::vector<std::filesystem::path> images;
  std::vector<double> sigmas;

  int coverage_grid = 200;
  int coverage_every = 0;  // rounds between coverage samples; 0 samples only the deployment

  ProbeConfig probe;
  std::filesystem::path output_dir = "out";

  // Set once radio.d0 is given explicitly; otherwise d0 follows eps_fs / eps_mp.
  bool radio_d0_explicit = false;

  // Throws std::invalid_argument for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  void validate() const;
};

std::vector<std::string> config_keys();

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

struct LifetimeRun {
  Protocol protocol = Protocol::proposed;
  std::uint64_t seed = 0;
  SimReport report;
  std::filesystem::path series_file;
};

struct LifetimeSummary {
  std::vector<LifetimeRun> runs;
  // Runs that never reached the event count as max_rounds (a lower bound).
  std::map<Protocol, double> median_fnd;
  std::map<Protocol, double> median_adt;
  std::filesystem::path summary_file;
};

// One series CSV per (protocol, seed) plus lifetime_summary.json.
LifetimeSummary run_lifetime_experiment(const ExperimentConfig& config);

// Adds i.i.d. N(0, sigma^2) noise and clamps to [0,255].
Image add_gaussian_noise(const Image& clean, double sigma, std::uint64_t seed);

struct PipelineImages {
  Image partial;  // sparse denoiser output
  Image region;   // region-growing smoothed partial
  Image final;    // noise-weighted fusion
};

// Sparse denoising (color collaboration for three channels), region growing on
// its output, then fusion.
PipelineImages run_denoise_pipeline(const Image& noisy, double sigma,
                                    const DenoiseParams& params, int region_bins,
                                    int min_component);

struct DenoiseRow {
  std::string image;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  QualityScore noisy;
  QualityScore partial;
  QualityScore final;
};

struct DenoiseSummary {
  std::vector<DenoiseRow> rows;
  std::vector<std::string> errors;  // per-file failures; the batch carries on
  std::filesystem::path csv_file;
};

// For every image x sigma x seed: noisy, partial and final images plus one
// row of denoise_metrics.csv.
DenoiseSummary run_denoise_experiment(const ExperimentConfig& config);

std::string format_metric(double value);

struct CoverageSample {
  int round = 0;
  int alive = 0;
  double rate = 0.0;
};

struct CoverageReport {
  std::vector<CoverageSample> samples;
  std::filesystem::path map_file;
  std::filesystem::path topology_file;
  std::filesystem::path series_file;
};

// Coverage of the first seed's deployment, then every coverage_every rounds of
// the proposed protocol up to max_rounds.
CoverageReport run_coverage_experiment(const ExperimentConfig& config);

struct ProbePoint {
  int atoms = 0;
  double seconds_per_estimate = 0.0;  // median over repeats
  double relative_spread = 0.0;       // stddev / mean over repeats
};

struct ProbeReport {
  std::vector<ProbePoint> points;
  std::optional<double> slope;  // least-squares log-log growth exponent in N

  std::string to_csv() const;
};

ProbeReport run_complexity_probe(const ProbeConfig& config, std::uint64_t seed = 7);

double median(std::vector<double> values);

}  // namespace corona
