// Command-line front end for the lifetime, coverage, denoising and probe runs.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corona/experiment.hpp"
#include "corona/image.hpp"

using namespace corona;

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::vector<std::uint64_t> seeds;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_file, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", c.overrides, "override a config key (key=value), repeatable");
  cmd->add_option("-o,--out", c.output_dir, "output directory");
  cmd->add_option("--seeds", c.seeds, "seed list")->delimiter(',');
}

ExperimentConfig build_config(const Common& c) {
  ExperimentConfig cfg = c.config_file.empty() ? ExperimentConfig{} : load_config(c.config_file);
  for (const std::string& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!c.output_dir.empty()) cfg.output_dir = c.output_dir;
  if (!c.seeds.empty()) cfg.seeds = c.seeds;
  return cfg;
}

std::string optional_round(const std::optional<int>& r) {
  return r ? std::to_string(*r) : std::string("none");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corona-partitioned WSN lifetime simulation and sparse image denoising"};
  app.require_subcommand(1);

  Common lifetime_opts;
  std::optional<int> rounds;
  auto* lifetime = app.add_subcommand("lifetime", "simulate network lifetime per protocol and seed");
  add_common(lifetime, lifetime_opts);
  lifetime->add_option("--rounds", rounds, "maximum number of rounds");

  Common denoise_opts;
  std::vector<std::string> images;
  std::vector<double> sigmas;
  std::string input, output;
  std::optional<double> sigma;
  auto* denoise = app.add_subcommand("denoise", "add noise to clean images and denoise them, or denoise one noisy image");
  add_common(denoise, denoise_opts);
  denoise->add_option("--image", images, "clean PGM/PPM image, repeatable");
  denoise->add_option("--sigmas", sigmas, "noise levels")->delimiter(',');
  denoise->add_option("--input", input, "already-noisy image to denoise directly")->check(CLI::ExistingFile);
  denoise->add_option("--output", output, "output path for --input");
  denoise->add_option("--sigma", sigma, "noise level of --input (estimated when omitted)");

  Common coverage_opts;
  auto* coverage = app.add_subcommand("coverage", "coverage rate, hole map and topology dump");
  add_common(coverage, coverage_opts);

  Common probe_opts;
  auto* probe = app.add_subcommand("probe", "time sparse estimation against dictionary size");
  add_common(probe, probe_opts);

  auto* keys = app.add_subcommand("keys", "list config keys");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*keys) {
      for (const std::string& k : config_keys()) std::cout << k << '\n';
    } else if (*lifetime) {
      ExperimentConfig cfg = build_config(lifetime_opts);
      if (rounds) cfg.max_rounds = *rounds;
      const LifetimeSummary s = run_lifetime_experiment(cfg);
      for (const LifetimeRun& r : s.runs) {
        std::cout << to_string(r.protocol) << " seed " << r.seed << ": FND " << optional_round(r.report.fnd)
                  << ", ADT " << optional_round(r.report.adt) << '\n';
      }
      for (const auto& [proto, fnd] : s.median_fnd) {
        std::cout << "median " << to_string(proto) << ": FND " << fnd << ", ADT " << s.median_adt.at(proto)
                  << '\n';
      }
      std::cout << "summary: " << s.summary_file.string() << '\n';
    } else if (*denoise) {
      ExperimentConfig cfg = build_config(denoise_opts);
      if (!input.empty()) {
        const Image noisy = read_pnm(input);
        const double level = sigma ? *sigma : estimate_noise_sigma(noisy);
        const PipelineImages res =
            run_denoise_pipeline(noisy, level, cfg.denoise, cfg.region_bins, cfg.min_component);
        write_pnm(output.empty() ? std::string("denoised.pgm") : output, res.final);
        std::cout << "sigma " << level << '\n';
        return 0;
      }
      for (const std::string& img : images) cfg.images.emplace_back(img);
      if (!sigmas.empty()) cfg.sigmas = sigmas;
      if (cfg.images.empty()) throw std::invalid_argument("no images given (--image or images = ...)");
      const DenoiseSummary s = run_denoise_experiment(cfg);
      for (const DenoiseRow& r : s.rows) {
        std::cout << r.image << " sigma " << r.sigma << " seed " << r.seed << ": PSNR "
                  << format_metric(r.noisy.psnr) << " -> " << format_metric(r.final.psnr) << ", SSIM "
                  << format_metric(r.noisy.ssim) << " -> " << format_metric(r.final.ssim) << '\n';
      }
      for (const std::string& e : s.errors) std::cerr << "error: " << e << '\n';
      std::cout << "metrics: " << s.csv_file.string() << '\n';
      if (!s.errors.empty()) return 2;
    } else if (*coverage) {
      const CoverageReport r = run_coverage_experiment(build_config(coverage_opts));
      for (const CoverageSample& s : r.samples) {
        std::cout << "round " << s.round << " alive " << s.alive << " coverage " << format_metric(s.rate)
                  << '\n';
      }
      std::cout << "map: " << r.map_file.string() << '\n';
    } else if (*probe) {
      const ExperimentConfig cfg = build_config(probe_opts);
      const ProbeReport r = run_complexity_probe(cfg.probe, cfg.seeds.empty() ? 7 : cfg.seeds.front());
      std::cout << r.to_csv();
      if (r.slope) std::cout << "slope " << format_metric(*r.slope) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
