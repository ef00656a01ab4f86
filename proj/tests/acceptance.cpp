// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corona/experiment.hpp"
#include "corona/region_fusion.hpp"

using namespace corona;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict energy_conservation() {
  double worst = 0.0, slowest = 0.0;
  int rounds = 0;
  for (Protocol proto : {Protocol::proposed, Protocol::leach}) {
    const auto start = Clock::now();
    Simulator sim(NetworkConfig{}, ProtocolParams{}, RadioParams::defaults(), proto);
    const double initial = sim.report().initial_energy_total;
    double consumed = 0.0;
    for (int r = 0; r < 8000; ++r) {
      const RoundState& s = sim.step();
      consumed += std::accumulate(s.energy_ledger.begin(), s.energy_ledger.end(), 0.0);
      double residual = 0.0;
      for (const Node& n : sim.nodes()) residual += n.residual_energy;
      worst = std::max(worst, std::abs(initial - residual - consumed) / initial);
      ++rounds;
    }
    slowest = std::max(slowest, seconds_since(start));
  }
  return {worst <= 1e-9 && slowest < 10.0 && rounds == 16000,
          "max relative gap " + sci(worst) + " over 8000 rounds x 2 protocols, slowest run " +
              num(slowest) + " s"};
}

Verdict lifetime_ordering() {
  std::vector<double> proposed, leach;
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    NetworkConfig net;
    net.seed = seed;
    const SimReport a = run_simulation(net, ProtocolParams{}, RadioParams::defaults(), Protocol::proposed, 8000);
    const SimReport b = run_simulation(net, ProtocolParams{}, RadioParams::defaults(), Protocol::leach, 8000);
    const double fa = a.fnd ? *a.fnd : 8000.0, fb = b.fnd ? *b.fnd : 8000.0;
    proposed.push_back(fa);
    leach.push_back(fb);
    wins += fa > fb ? 1 : 0;
  }
  const double mp = median(proposed), ml = median(leach);
  return {mp >= 2.0 * ml && wins >= 9,
          "median FND proposed " + num(mp, 1) + " vs baseline " + num(ml, 1) + " (ratio " + num(mp / ml, 2) +
              "), wins " + std::to_string(wins) + "/10"};
}

Verdict topology_identity() {
  bool ok = true;
  std::string detail;
  for (int eta : {3, 4, 5}) {
    NetworkConfig cfg;
    cfg.corona_count = eta;
    const Topology t = build_topology(cfg);
    double sum = 0.0;
    for (const SensingRegion& r : t.regions) sum += r.area();
    const double expect = M_PI * 150.0 * 150.0;
    const double rel = std::abs(sum - expect) / expect;
    ok = ok && rel <= 1e-9;
    detail += "eta=" + std::to_string(eta) + " rel " + sci(rel) + "; ";
  }
  return {ok, detail};
}

Verdict coverage_oracle() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> pos(-150.0, 150.0), rad(5.0, 60.0);
  int mismatches = 0, checks = 0;
  for (int config = 0; config < 100; ++config) {
    std::vector<Node> nodes(20);
    for (Node& n : nodes) {
      n.position = {pos(rng), pos(rng)};
      n.sensing_radius = rad(rng);
    }
    std::vector<Point> pixels;
    for (int i = 0; i < 400; ++i) pixels.push_back({pos(rng), pos(rng)});
    // exact boundary pixels: a 3-4-5 offset scaled onto a node's radius
    for (const Node& n : nodes) {
      pixels.push_back({n.position.x + 0.6 * n.sensing_radius, n.position.y + 0.8 * n.sensing_radius});
    }
    for (Point px : pixels) {
      bool any = false;
      for (const Node& n : nodes) {
        const double dx = n.position.x - px.x, dy = n.position.y - px.y;
        any = any || dx * dx + dy * dy <= n.sensing_radius * n.sensing_radius;
      }
      mismatches += coverage_probability(nodes, px) == (any ? 1.0 : 0.0) ? 0 : 1;
      ++checks;
    }
  }
  Node centre;
  centre.sensing_radius = 75.0;
  const Topology t = build_topology(NetworkConfig{});
  const double rate = coverage_rate(std::vector<Node>{centre}, t, 200);
  return {mismatches == 0 && std::abs(rate - 0.25) <= 0.02,
          std::to_string(checks - mismatches) + "/" + std::to_string(checks) +
              " pixels match the any-node scan; single h=75 node rate " + num(rate, 4)};
}

Verdict sparse_recovery() {
  std::mt19937_64 rng(505);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  std::uniform_int_distribution<int> rows(8, 12);
  std::string detail;
  bool ok = true;
  double worst_noiseless = 0.0;
  for (double sigma : {0.0, 0.01}) {
    int agree = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const int m = rows(rng);
      const int n = std::uniform_int_distribution<int>(m, 16)(rng);
      const int s = 1 + trial % 2;
      Eigen::MatrixXd a(m, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) a(i, j) = g(rng);
        a.col(j).normalize();
      }
      Dictionary d;
      d.atoms = a;
      std::vector<int> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
      for (int k = 0; k < s; ++k) y += ((rng() & 1U) ? 1.0 : -1.0) * mag(rng) * a.col(idx[k]);
      for (Eigen::Index i = 0; i < m; ++i) y[i] += sigma * g(rng);

      std::set<int> best;
      double best_res = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        for (int j = (s == 1 ? i : i + 1); j < (s == 1 ? i + 1 : n); ++j) {
          Eigen::MatrixXd sub(m, s);
          sub.col(0) = a.col(i);
          if (s == 2) sub.col(1) = a.col(j);
          const Eigen::VectorXd x = sub.colPivHouseholderQr().solve(y);
          const double res = (y - sub * x).squaredNorm();
          if (res < best_res) {
            best_res = res;
            best = s == 1 ? std::set<int>{i} : std::set<int>{i, j};
          }
        }
      }
      const SparseEstimate e = sparse_estimate(y, d, sigma, DenoiseParams{}.prior_active);
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int p, int q) {
                         if (e.active_prob[p] != e.active_prob[q]) return e.active_prob[p] > e.active_prob[q];
                         return std::abs(e.theta[p]) > std::abs(e.theta[q]);
                       });
      agree += std::set<int>(order.begin(), order.begin() + s) == best ? 1 : 0;
      if (sigma == 0.0) worst_noiseless = std::max(worst_noiseless, (a * e.theta - y).norm());
    }
    ok = ok && agree >= 95;
    detail += "sigma=" + num(sigma, 2) + ": " + std::to_string(agree) + "/100; ";
  }
  ok = ok && worst_noiseless <= 1e-9;
  return {ok, detail + "noiseless residual " + sci(worst_noiseless)};
}

Verdict denoising_gain() {
  const Image clean = read_pnm(fs::path(TEST_DATA_DIR) / "cameraman256.pgm");
  bool ok = clean.width() == 256 && clean.height() == 256 && clean.channels() == 1;
  std::string detail;
  double t20 = 0.0;
  for (double sigma : {10.0, 15.0, 20.0, 50.0}) {
    const Image noisy = add_gaussian_noise(clean, sigma, 1000 + static_cast<std::uint64_t>(sigma));
    const auto start = Clock::now();
    const PipelineImages out = run_denoise_pipeline(noisy, sigma, DenoiseParams{}, 64, 32);
    if (sigma == 20.0) t20 = seconds_since(start);
    const QualityScore before = quality(clean, noisy), after = quality(clean, out.final);
    const double dp = after.psnr - before.psnr, ds = after.ssim - before.ssim;
    ok = ok && (sigma == 50.0 ? dp >= 2.0 : dp >= 4.0 && ds >= 0.10);
    detail += "s" + num(sigma, 0) + " +" + num(dp, 2) + "dB/+" + num(ds, 3) + "; ";
  }
  ok = ok && t20 < 60.0;
  return {ok, detail + "sigma=20 took " + num(t20, 2) + " s"};
}

Verdict gaussianity() {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> coef(0.1, 3.0);
  std::normal_distribution<double> g;
  bool ok = true;
  std::string detail;
  for (int pair = 0; pair < 5; ++pair) {
    const double rho = coef(rng), delta = coef(rng);
    std::vector<double> z(100000);
    for (double& v : z) v = rho * g(rng) + delta * g(rng);
    const GaussianityReport r = gaussianity_check(z, rho * rho + delta * delta);
    ok = ok && r.passed;
    detail += "(" + num(rho, 2) + "," + num(delta, 2) + ")" + (r.passed ? "ok " : "FAIL ");
  }
  return {ok, detail};
}

Verdict region_fixtures() {
  const Image flat(48, 48, 1, 77.0);
  const bool constant_ok = region_grow_smooth(flat, 64, 32) == flat;
  const bool bin_ok = bin_index(5.0, 64) + 1 == 2;
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Image d(64, 64), r(64, 64);
  for (double& v : d.data()) v = u(rng);
  for (double& v : r.data()) v = u(rng);
  const Image f = fuse(d, r, 0.0);
  const bool fuse_ok = std::equal(f.data().begin(), f.data().end(), d.data().begin(),
                                  [](double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; });
  return {constant_ok && bin_ok && fuse_ok,
          std::string("constant ") + (constant_ok ? "unchanged" : "CHANGED") + ", bin(5) group " +
              std::to_string(bin_index(5.0, 64) + 1) + ", sigma=0 fuse " + (fuse_ok ? "bit-exact" : "DIFFERS")};
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "corona_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const Image full = read_pnm(fs::path(TEST_DATA_DIR) / "cameraman256.pgm");
  Image crop(96, 96);
  for (int y = 0; y < 96; ++y) {
    for (int x = 0; x < 96; ++x) crop.at(x, y) = full.at(x + 80, y + 40);
  }
  write_pnm(root / "crop.pgm", crop);

  auto run_all = [&](const fs::path& out) {
    ExperimentConfig c;
    c.output_dir = out;
    c.max_rounds = 2000;
    c.seeds = {1, 2, 3};
    c.images = {root / "crop.pgm", fs::path(TEST_DATA_DIR) / "astronaut256.ppm"};
    c.sigmas = {20.0};
    c.coverage_every = 400;
    run_lifetime_experiment(c);
    c.seeds = {1};
    run_denoise_experiment(c);
    run_coverage_experiment(c);
  };
  run_all(root / "a");
  run_all(root / "b");
  int files = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path other = root / "b" / e.path().filename();
    differing += fs::exists(other) && slurp(e.path()) == slurp(other) ? 0 : 1;
  }
  return {files > 0 && differing == 0,
          std::to_string(files - differing) + "/" + std::to_string(files) + " artifacts byte-identical"};
}

Verdict complexity_probe() {
  const ProbeReport r = run_complexity_probe(ProbeConfig{});
  std::string detail;
  for (const ProbePoint& p : r.points) {
    detail += "N=" + std::to_string(p.atoms) + " " + num(p.seconds_per_estimate * 1e6, 1) + "us; ";
  }
  if (!r.slope) return {false, detail + "no slope"};
  return {*r.slope <= 2.3, detail + "log-log slope " + num(*r.slope, 3)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"energy conservation", energy_conservation},
      {"lifetime ordering", lifetime_ordering},
      {"topology area identity", topology_identity},
      {"coverage oracle", coverage_oracle},
      {"sparse recovery oracle", sparse_recovery},
      {"denoising improvement", denoising_gain},
      {"variance-sum gaussianity", gaussianity},
      {"region growing fixtures", region_fixtures},
      {"determinism", determinism},
      {"complexity probe", complexity_probe},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
