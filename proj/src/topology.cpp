#include "corona/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace corona {

namespace {

double normalize_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

// Positive-measure overlap of two arcs given as [begin, begin + span).
bool arcs_overlap(double a_begin, double a_span, double b_begin, double b_span) {
  constexpr double kEps = 1e-9;
  for (int wrap = -1; wrap <= 1; ++wrap) {
    const double b0 = b_begin + wrap * kTwoPi;
    const double lo = std::max(a_begin, b0);
    const double hi = std::min(a_begin + a_span, b0 + b_span);
    if (hi - lo > kEps) return true;
  }
  return false;
}

}  // namespace

int NetworkConfig::resolved_corona_count() const {
  const int eta = corona_count > 0
                      ? corona_count
                      : static_cast<int>(std::lround(diameter / static_cast<double>(node_count)));
  if (eta < 2) {
    throw std::invalid_argument("corona count must be at least 2 (got " + std::to_string(eta) +
                                ")");
  }
  return eta;
}

void NetworkConfig::validate() const {
  if (node_count <= 0) throw std::invalid_argument("node_count must be positive");
  if (!(diameter > 0.0)) throw std::invalid_argument("diameter must be positive");
  if (regions_per_corona < 2) throw std::invalid_argument("regions_per_corona must be >= 2");
  if (!(inner_fraction > 0.0 && inner_fraction < 1.0)) {
    throw std::invalid_argument("inner_fraction must lie in (0, 1)");
  }
  if (!(sensing_radius >= 0.0)) throw std::invalid_argument("sensing_radius must be >= 0");
  const int eta = resolved_corona_count();
  if (node_count < regions_per_corona * (eta - 1) + 1) {
    throw std::invalid_argument("too few nodes for the region layout");
  }
}

double Corona::area() const {
  return std::numbers::pi * (outer_radius * outer_radius - inner_radius * inner_radius);
}

double SensingRegion::area() const {
  return 0.5 * angle_span * (outer_radius * outer_radius - inner_radius * inner_radius);
}

bool SensingRegion::contains(Point p) const {
  constexpr double kEps = 1e-9;
  const double r = std::hypot(p.x, p.y);
  if (r < inner_radius - kEps || r > outer_radius + kEps) return false;
  if (angle_span >= kTwoPi) return true;
  const double rel = normalize_angle(std::atan2(p.y, p.x) - angle_begin);
  return rel <= angle_span + kEps || rel >= kTwoPi - kEps;
}

int Topology::region_of(Point p) const {
  const double r = std::hypot(p.x, p.y);
  if (r > field_radius() + 1e-9) return -1;
  const int eta = corona_count();
  const int corona = std::min(eta, static_cast<int>(r / beta) + 1);
  if (corona == 1) return 0;
  const double angle = normalize_angle(std::atan2(p.y, p.x));
  const double width = kTwoPi / regions_per_corona;
  const int first = 1 + (corona - 2) * regions_per_corona;
  const double offset = regions[first].angle_begin;
  const int sector =
      static_cast<int>(normalize_angle(angle - offset) / width) % regions_per_corona;
  return first + sector;
}

Topology build_topology(const NetworkConfig& config) {
  config.validate();
  const int eta = config.resolved_corona_count();
  const int rpc = config.regions_per_corona;

  Topology topo;
  topo.diameter = config.diameter;
  topo.beta = config.diameter / (2.0 * eta);
  topo.regions_per_corona = rpc;

  for (int a = 1; a <= eta; ++a) {
    topo.coronas.push_back({a, (a - 1) * topo.beta, a * topo.beta});
  }

  SensingRegion inner;
  inner.id = 0;
  inner.corona = 1;
  inner.outer_radius = topo.beta;
  topo.regions.push_back(inner);

  const double width = kTwoPi / rpc;
  for (int a = 2; a <= eta; ++a) {
    const double offset = (a % 2 == 0) ? 0.0 : width / 2.0;
    for (int s = 0; s < rpc; ++s) {
      SensingRegion reg;
      reg.id = static_cast<int>(topo.regions.size());
      reg.corona = a;
      reg.inner_radius = topo.coronas[a - 1].inner_radius;
      reg.outer_radius = topo.coronas[a - 1].outer_radius;
      reg.angle_begin = normalize_angle(offset + s * width);
      reg.angle_span = width;
      const double mid = reg.angle_begin + width / 2.0;
      const double rmid = (reg.inner_radius + reg.outer_radius) / 2.0;
      reg.center = {rmid * std::cos(mid), rmid * std::sin(mid)};
      if (a >= 3) {
        const int lower_first = 1 + (a - 3) * rpc;
        for (int t = 0; t < rpc; ++t) {
          const SensingRegion& low = topo.regions[lower_first + t];
          if (arcs_overlap(reg.angle_begin, width, low.angle_begin, low.angle_span)) {
            reg.lower_neighbors.push_back(low.id);
          }
        }
      }
      topo.regions.push_back(std::move(reg));
    }
  }
  return topo;
}

Deployment deploy_nodes(const Topology& topology, const NetworkConfig& config,
                        double initial_energy) {
  config.validate();
  const int total = config.node_count;
  const int inner = static_cast<int>(std::lround(config.inner_fraction * total));
  const int outer_regions = static_cast<int>(topology.regions.size()) - 1;
  const int rest = total - inner;

  // Largest remainder over equal shares: every quota is rest / outer_regions,
  // so the leftover units go to the lowest region ids.
  std::vector<int> counts(topology.regions.size(), 0);
  counts[0] = inner;
  for (int r = 1; r <= outer_regions; ++r) {
    counts[r] = rest / outer_regions + ((r - 1) < rest % outer_regions ? 1 : 0);
  }

  Deployment out;
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const SensingRegion& reg : topology.regions) {
    if (counts[reg.id] == 0) {
      out.warnings.push_back("region " + reg.label() + " received no nodes");
    }
    const double r0sq = reg.inner_radius * reg.inner_radius;
    const double r1sq = reg.outer_radius * reg.outer_radius;
    for (int i = 0; i < counts[reg.id]; ++i) {
      const double r = std::sqrt(r0sq + unit(rng) * (r1sq - r0sq));
      const double a = reg.angle_begin + unit(rng) * reg.angle_span;
      Node n;
      n.id = static_cast<int>(out.nodes.size());
      n.position = {r * std::cos(a), r * std::sin(a)};
      n.region = reg.id;
      n.residual_energy = initial_energy;
      n.sensing_radius = config.sensing_radius;
      out.nodes.push_back(n);
    }
  }
  return out;
}

int pixel_covered(const Node& node, Point pixel) {
  return squared_distance(node.position, pixel) <= node.sensing_radius * node.sensing_radius ? 1
                                                                                             : 0;
}

double coverage_probability(std::span<const Node> nodes, Point pixel) {
  double miss = 1.0;
  for (const Node& n : nodes) miss *= 1.0 - pixel_covered(n, pixel);
  return 1.0 - miss;
}

namespace {

template <typename Fn>
void for_each_grid_cell(const Topology& topology, int res, Fn&& fn) {
  const double radius = topology.field_radius();
  const double step = 2.0 * radius / res;
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      const Point p{-radius + (i + 0.5) * step, radius - (j + 0.5) * step};
      fn(i, j, p, p.x * p.x + p.y * p.y <= radius * radius);
    }
  }
}

std::vector<Node> alive_only(std::span<const Node> nodes) {
  std::vector<Node> alive;
  for (const Node& n : nodes) {
    if (n.alive) alive.push_back(n);
  }
  return alive;
}

}  // namespace

double coverage_rate(std::span<const Node> nodes, const Topology& topology, int grid_resolution) {
  if (grid_resolution < 16) throw std::invalid_argument("grid_resolution must be >= 16");
  const std::vector<Node> alive = alive_only(nodes);
  if (alive.empty()) return 0.0;
  double covered = 0.0;
  long inside = 0;
  for_each_grid_cell(topology, grid_resolution, [&](int, int, Point p, bool in_field) {
    if (!in_field) return;
    ++inside;
    covered += coverage_probability(alive, p);
  });
  return inside == 0 ? 0.0 : covered / static_cast<double>(inside);
}

Image coverage_map(std::span<const Node> nodes, const Topology& topology, int grid_resolution) {
  if (grid_resolution < 16) throw std::invalid_argument("grid_resolution must be >= 16");
  const std::vector<Node> alive = alive_only(nodes);
  Image map(grid_resolution, grid_resolution, 1);
  for_each_grid_cell(topology, grid_resolution, [&](int i, int j, Point p, bool in_field) {
    map.at(i, j) = in_field ? 255.0 * coverage_probability(alive, p) : 96.0;
  });
  return map;
}

std::string topology_to_json(const Topology& topology, std::span<const Node> nodes) {
  using nlohmann::json;
  json j;
  j["diameter_m"] = topology.diameter;
  j["beta_m"] = topology.beta;
  j["bs"] = {topology.bs_position.x, topology.bs_position.y};
  j["coronas"] = json::array();
  for (const Corona& c : topology.coronas) {
    j["coronas"].push_back(
        {{"index", c.index}, {"inner_m", c.inner_radius}, {"outer_m", c.outer_radius}});
  }
  j["regions"] = json::array();
  for (const SensingRegion& r : topology.regions) {
    json lower = json::array();
    for (int id : r.lower_neighbors) lower.push_back(id);
    j["regions"].push_back({{"id", r.id},
                            {"label", r.label()},
                            {"corona", r.corona},
                            {"angle_begin_rad", r.angle_begin},
                            {"angle_span_rad", r.angle_span},
                            {"center", {r.center.x, r.center.y}},
                            {"area_m2", r.area()},
                            {"lower_neighbors", lower}});
  }
  j["nodes"] = json::array();
  for (const Node& n : nodes) {
    j["nodes"].push_back({{"id", n.id},
                          {"x", n.position.x},
                          {"y", n.position.y},
                          {"region", n.region},
                          {"residual_j", n.residual_energy},
                          {"alive", n.alive}});
  }
  return j.dump(2);
}

}  // namespace corona
