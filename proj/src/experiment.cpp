#include "corona/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "corona/region_fusion.hpp"

namespace corona {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  T value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_number_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const std::string& item : split_list(text)) out.push_back(parse_number<T>(key, item));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

template <typename T, typename Member>
Setter number(Member member) {
  return [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
    std::invoke(member, c) = parse_number<T>(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["network.nodes"] = number<int>([](ExperimentConfig& c) -> int& { return c.network.node_count; });
    t["network.diameter"] = number<double>([](ExperimentConfig& c) -> double& { return c.network.diameter; });
    t["network.coronas"] = number<int>([](ExperimentConfig& c) -> int& { return c.network.corona_count; });
    t["network.regions_per_corona"] =
        number<int>([](ExperimentConfig& c) -> int& { return c.network.regions_per_corona; });
    t["network.inner_fraction"] =
        number<double>([](ExperimentConfig& c) -> double& { return c.network.inner_fraction; });
    t["network.sensing_radius"] =
        number<double>([](ExperimentConfig& c) -> double& { return c.network.sensing_radius; });

    t["radio.e_elec"] = number<double>([](ExperimentConfig& c) -> double& { return c.radio.e_elec; });
    t["radio.e_agg"] = number<double>([](ExperimentConfig& c) -> double& { return c.radio.e_agg; });
    auto amp = [](double RadioParams::*field) {
      return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.radio.*field = parse_number<double>(k, v);
        if (!c.radio_d0_explicit && c.radio.eps_fs > 0.0 && c.radio.eps_mp > 0.0) {
          c.radio.d0 = RadioParams::crossover_distance(c.radio.eps_fs, c.radio.eps_mp);
        }
      };
    };
    t["radio.eps_fs"] = amp(&RadioParams::eps_fs);
    t["radio.eps_mp"] = amp(&RadioParams::eps_mp);
    t["radio.d0"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.radio.d0 = parse_number<double>(k, v);
      c.radio_d0_explicit = true;
    };

    t["protocol.packet_bits"] =
        number<std::int64_t>([](ExperimentConfig& c) -> std::int64_t& { return c.protocol.packet_bits; });
    t["protocol.ch_quantile"] =
        number<double>([](ExperimentConfig& c) -> double& { return c.protocol.ch_energy_quantile; });
    t["protocol.initial_energy"] =
        number<double>([](ExperimentConfig& c) -> double& { return c.protocol.initial_energy; });
    t["protocol.leach_p"] =
        number<double>([](ExperimentConfig& c) -> double& { return c.protocol.leach_probability; });
    t["protocol.max_rounds"] = number<int>([](ExperimentConfig& c) -> int& { return c.max_rounds; });
    t["protocol.names"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.protocols.clear();
      for (const std::string& name : split_list(v)) c.protocols.push_back(protocol_from_string(name));
    };
    t["seeds"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.seeds = parse_number_list<std::uint64_t>(k, v);
    };

    t["denoise.patch"] = number<int>([](ExperimentConfig& c) -> int& { return c.denoise.patch_size; });
    t["denoise.stride"] = number<int>([](ExperimentConfig& c) -> int& { return c.denoise.stride; });
    t["denoise.group"] = number<int>([](ExperimentConfig& c) -> int& { return c.denoise.group_size; });
    t["denoise.r_min"] = number<double>([](ExperimentConfig& c) -> double& { return c.denoise.r_min; });
    t["denoise.tau"] = number<double>([](ExperimentConfig& c) -> double& { return c.denoise.tau; });
    t["denoise.lambda"] =
        number<double>([](ExperimentConfig& c) -> double& { return c.denoise.prior_active; });
    t["denoise.q_floor"] = number<double>([](ExperimentConfig& c) -> double& { return c.denoise.q_floor; });
    t["denoise.bins"] = number<int>([](ExperimentConfig& c) -> int& { return c.region_bins; });
    t["denoise.t_cc"] = number<int>([](ExperimentConfig& c) -> int& { return c.min_component; });
    t["images"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.images.clear();
      for (const std::string& item : split_list(v)) c.images.emplace_back(item);
    };
    t["sigmas"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.sigmas = parse_number_list<double>(k, v);
    };

    t["coverage.grid"] = number<int>([](ExperimentConfig& c) -> int& { return c.coverage_grid; });
    t["coverage.every"] = number<int>([](ExperimentConfig& c) -> int& { return c.coverage_every; });

    t["probe.rows"] = number<int>([](ExperimentConfig& c) -> int& { return c.probe.rows; });
    t["probe.sparsity"] = number<int>([](ExperimentConfig& c) -> int& { return c.probe.sparsity; });
    t["probe.repeats"] = number<int>([](ExperimentConfig& c) -> int& { return c.probe.repeats; });
    t["probe.noise_sigma"] =
        number<double>([](ExperimentConfig& c) -> double& { return c.probe.noise_sigma; });
    t["probe.atoms"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.probe.atoms = parse_number_list<int>(k, v);
    };

    t["output_dir"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.output_dir = trim(v);
    };
    return t;
  }();
  return table;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(trim(key));
  if (it == table.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  it->second(*this, trim(key), value);
}

void ExperimentConfig::validate() const {
  network.validate();
  radio.validate();
  protocol.validate();
  denoise.validate();
  if (max_rounds < 1) throw std::invalid_argument("protocol.max_rounds must be >= 1");
  if (region_bins < 2) throw std::invalid_argument("denoise.bins must be >= 2");
  if (min_component < 1) throw std::invalid_argument("denoise.t_cc must be >= 1");
  if (coverage_grid < 16) throw std::invalid_argument("coverage.grid must be >= 16");
  if (coverage_every < 0) throw std::invalid_argument("coverage.every must be >= 0");
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw std::invalid_argument("sigmas must be >= 0");
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : setters()) keys.push_back(k);
  return keys;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    config.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return config;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

LifetimeSummary run_lifetime_experiment(const ExperimentConfig& config) {
  config.validate();
  ensure_dir(config.output_dir);
  LifetimeSummary summary;
  nlohmann::json runs = nlohmann::json::array();
  std::map<Protocol, std::vector<double>> fnds, adts;
  for (Protocol proto : config.protocols) {
    for (std::uint64_t seed : config.seeds) {
      NetworkConfig net = config.network;
      net.seed = seed;
      LifetimeRun run;
      run.protocol = proto;
      run.seed = seed;
      run.report = run_simulation(net, config.protocol, config.radio, proto, config.max_rounds);
      run.series_file =
          config.output_dir / ("lifetime_" + to_string(proto) + "_seed" + std::to_string(seed) + ".csv");
      write_text(run.series_file, run.report.to_csv());

      fnds[proto].push_back(run.report.fnd ? *run.report.fnd : config.max_rounds);
      adts[proto].push_back(run.report.adt ? *run.report.adt : config.max_rounds);
      auto entry = nlohmann::json::parse(run.report.to_json());
      entry["seed"] = seed;
      entry["series_file"] = run.series_file.filename().string();
      runs.push_back(std::move(entry));
      summary.runs.push_back(std::move(run));
    }
  }
  nlohmann::json j;
  j["max_rounds"] = config.max_rounds;
  j["runs"] = std::move(runs);
  for (Protocol proto : config.protocols) {
    summary.median_fnd[proto] = median(fnds[proto]);
    summary.median_adt[proto] = median(adts[proto]);
    j["median_fnd"][to_string(proto)] = summary.median_fnd[proto];
    j["median_adt"][to_string(proto)] = summary.median_adt[proto];
  }
  summary.summary_file = config.output_dir / "lifetime_summary.json";
  write_text(summary.summary_file, j.dump(2) + "\n");
  return summary;
}

Image add_gaussian_noise(const Image& clean, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  Image noisy = clean;
  if (sigma == 0.0) return noisy;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : noisy.data()) v += noise(rng);
  noisy.clamp();
  return noisy;
}

PipelineImages run_denoise_pipeline(const Image& noisy, double sigma, const DenoiseParams& params,
                                    int region_bins, int min_component) {
  PipelineImages out;
  out.partial = noisy.channels() == 3 ? denoise_color(noisy, sigma, params)
                                      : denoise_gray(noisy, sigma, params);
  out.region = region_grow_smooth(out.partial, region_bins, min_component);
  out.final = fuse(out.partial, out.region, sigma);
  return out;
}

std::string format_metric(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, 6);
  return std::string(buf, res.ptr);
}

DenoiseSummary run_denoise_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.sigmas.empty()) throw std::invalid_argument("denoise experiment needs sigmas");
  ensure_dir(config.output_dir);
  DenoiseSummary summary;
  std::string csv = "image,sigma,psnr_noisy,psnr_denoised,ssim_noisy,ssim_denoised,seed\n";
  for (std::size_t idx = 0; idx < config.images.size(); ++idx) {
    const fs::path& path = config.images[idx];
    Image clean;
    try {
      clean = read_pnm(path);
    } catch (const std::exception& e) {
      summary.errors.push_back(path.string() + ": " + e.what());
      continue;
    }
    const std::string stem = path.stem().string();
    const std::string ext = clean.channels() == 3 ? ".ppm" : ".pgm";
    for (double sigma : config.sigmas) {
      for (std::uint64_t seed : config.seeds) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(idx),
                          static_cast<std::uint32_t>(std::llround(sigma * 1000.0))};
        std::uint64_t mixed = 0;
        std::array<std::uint32_t, 2> words{};
        seq.generate(words.begin(), words.end());
        mixed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];

        DenoiseRow row;
        row.image = path.filename().string();
        row.sigma = sigma;
        row.seed = seed;
        try {
          const Image noisy = add_gaussian_noise(clean, sigma, mixed);
          const PipelineImages res =
              run_denoise_pipeline(noisy, sigma, config.denoise, config.region_bins, config.min_component);
          const std::string base =
              stem + "_sigma" + shortest(sigma) + "_seed" + std::to_string(seed);
          write_pnm(config.output_dir / (base + "_noisy" + ext), noisy);
          write_pnm(config.output_dir / (base + "_partial" + ext), res.partial);
          write_pnm(config.output_dir / (base + "_final" + ext), res.final);
          row.noisy = quality(clean, noisy);
          row.partial = quality(clean, res.partial);
          row.final = quality(clean, res.final);
        } catch (const std::exception& e) {
          summary.errors.push_back(path.string() + ": " + e.what());
          continue;
        }
        csv += row.image + ',' + shortest(sigma) + ',' + format_metric(row.noisy.psnr) + ',' +
               format_metric(row.final.psnr) + ',' + format_metric(row.noisy.ssim) + ',' +
               format_metric(row.final.ssim) + ',' + std::to_string(seed) + '\n';
        summary.rows.push_back(row);
      }
    }
  }
  summary.csv_file = config.output_dir / "denoise_metrics.csv";
  write_text(summary.csv_file, csv);
  return summary;
}

CoverageReport run_coverage_experiment(const ExperimentConfig& config) {
  config.validate();
  ensure_dir(config.output_dir);
  NetworkConfig net = config.network;
  if (!config.seeds.empty()) net.seed = config.seeds.front();

  Simulator sim(net, config.protocol, config.radio, Protocol::proposed);
  CoverageReport report;
  auto sample = [&] {
    report.samples.push_back({sim.round(), sim.alive_count(),
                              coverage_rate(sim.nodes(), sim.topology(), config.coverage_grid)});
  };
  sample();
  report.map_file = config.output_dir / "coverage_map_round0.pgm";
  write_pnm(report.map_file, coverage_map(sim.nodes(), sim.topology(), config.coverage_grid));
  report.topology_file = config.output_dir / "topology.json";
  write_text(report.topology_file, topology_to_json(sim.topology(), sim.nodes()) + "\n");

  if (config.coverage_every > 0) {
    while (sim.round() < config.max_rounds && !sim.all_dead()) {
      sim.step();
      if (sim.round() % config.coverage_every == 0 || sim.all_dead()) sample();
    }
  }
  std::string csv = "round,alive,coverage_rate\n";
  for (const CoverageSample& s : report.samples) {
    csv += std::to_string(s.round) + ',' + std::to_string(s.alive) + ',' + format_metric(s.rate) + '\n';
  }
  report.series_file = config.output_dir / "coverage_series.csv";
  write_text(report.series_file, csv);
  return report;
}

std::string ProbeReport::to_csv() const {
  std::string csv = "atoms,seconds_per_estimate,relative_spread\n";
  for (const ProbePoint& p : points) {
    csv += std::to_string(p.atoms) + ',' + shortest(p.seconds_per_estimate) + ',' +
           format_metric(p.relative_spread) + '\n';
  }
  return csv;
}

ProbeReport run_complexity_probe(const ProbeConfig& config, std::uint64_t seed) {
  ProbeReport report;
  if (config.atoms.empty()) return report;
  if (config.rows < 1 || config.sparsity < 1 || config.repeats < 1) {
    throw std::invalid_argument("probe: rows, sparsity and repeats must be positive");
  }
  using Clock = std::chrono::steady_clock;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  constexpr int kSignals = 32;
  constexpr double kMinBatchSeconds = 0.02;

  for (int n : config.atoms) {
    if (n < config.sparsity) throw std::invalid_argument("probe: atoms must exceed sparsity");
    Eigen::MatrixXd raw(config.rows, n);
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
      for (Eigen::Index i = 0; i < raw.rows(); ++i) raw(i, j) = gauss(rng);
      raw.col(j).normalize();
    }
    Dictionary dict;
    dict.atoms = raw;
    dict.tau = 1.0;
    for (int j = 0; j < n; ++j) dict.kept.push_back(j);

    std::vector<Eigen::VectorXd> signals;
    for (int s = 0; s < kSignals; ++s) {
      std::vector<int> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      Eigen::VectorXd y = Eigen::VectorXd::Zero(config.rows);
      for (int k = 0; k < config.sparsity; ++k) {
        const double sign = (rng() & 1U) ? 1.0 : -1.0;
        y += sign * mag(rng) * raw.col(idx[k]);
      }
      for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += config.noise_sigma * gauss(rng);
      signals.push_back(std::move(y));
    }

    volatile double sink = 0.0;
    std::vector<double> per_estimate;
    for (int r = 0; r < config.repeats; ++r) {
      long calls = 0;
      const auto start = Clock::now();
      double elapsed = 0.0;
      do {
        for (const Eigen::VectorXd& y : signals) {
          const SparseEstimate est = sparse_estimate(y, dict, config.noise_sigma, 0.5);
          sink = sink + est.theta[0];
          ++calls;
        }
        elapsed = std::chrono::duration<double>(Clock::now() - start).count();
      } while (elapsed < kMinBatchSeconds);
      per_estimate.push_back(elapsed / static_cast<double>(calls));
    }
    const double mean =
        std::accumulate(per_estimate.begin(), per_estimate.end(), 0.0) / per_estimate.size();
    double var = 0.0;
    for (double t : per_estimate) var += (t - mean) * (t - mean);
    var /= per_estimate.size();
    report.points.push_back({n, median(per_estimate), mean > 0.0 ? std::sqrt(var) / mean : 0.0});
  }

  if (report.points.size() >= 2) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const ProbePoint& p : report.points) {
      const double x = std::log(static_cast<double>(p.atoms));
      const double y = std::log(p.seconds_per_estimate);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double k = static_cast<double>(report.points.size());
    const double denom = k * sxx - sx * sx;
    if (denom > 0.0) report.slope = (k * sxy - sx * sy) / denom;
  }
  return report;
}

}  // namespace corona
