#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "corona/geometry.hpp"
#include "corona/image.hpp"

namespace corona {

struct NetworkConfig {
  int node_count = 100;          // L
  double diameter = 300.0;       // D, meters
  int corona_count = 0;          // 0 derives round(D / L)
  int regions_per_corona = 4;
  double inner_fraction = 0.2;   // share of nodes placed in the undivided inner corona
  double sensing_radius = 25.0;  // h, meters
  std::uint64_t seed = 1;

  // Resolved corona count; throws std::invalid_argument when it is below 2.
  int resolved_corona_count() const;
  void validate() const;
};

struct Corona {
  int index = 1;  // 1 is the innermost
  double inner_radius = 0.0;
  double outer_radius = 0.0;

  double area() const;
};

struct SensingRegion {
  int id = 0;          // 0 is the undivided inner region R1
  int corona = 1;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  double angle_begin = 0.0;  // radians in [0, 2pi)
  double angle_span = kTwoPi;
  std::vector<int> lower_neighbors;  // the two overlapped regions one corona down
  Point center;

  double area() const;
  bool contains(Point p) const;
  // R1-style label, 1-based.
  std::string label() const { return "R" + std::to_string(id + 1); }
};

struct Topology {
  double diameter = 0.0;
  double beta = 0.0;  // radius of the innermost corona
  int regions_per_corona = 0;
  std::vector<Corona> coronas;
  std::vector<SensingRegion> regions;
  Point bs_position;

  int corona_count() const { return static_cast<int>(coronas.size()); }
  double field_radius() const { return diameter / 2.0; }
  // Region containing p, or -1 when p lies outside the field.
  int region_of(Point p) const;
};

enum class NodeRole { normal, cluster_head };

struct Node {
  int id = 0;
  Point position;
  int region = 0;
  double residual_energy = 0.0;
  double sensing_radius = 25.0;
  bool alive = true;
  NodeRole role = NodeRole::normal;
};

struct Deployment {
  std::vector<Node> nodes;
  std::vector<std::string> warnings;
};

// Equal-width coronas, corona 1 undivided, coronas >= 2 split into equal
// sectors with alternate coronas rotated by half a sector.
Topology build_topology(const NetworkConfig& config);

// round(inner_fraction * L) nodes in R1, the rest spread over the outer regions
// by largest remainder (ties to the lower region id). Uniform within each region.
Deployment deploy_nodes(const Topology& topology, const NetworkConfig& config,
                        double initial_energy = 0.0);

// Binary disc coverage: 1 iff the pixel is within the node's sensing radius.
int pixel_covered(const Node& node, Point pixel);

// 1 - prod(1 - covered) over the given nodes.
double coverage_probability(std::span<const Node> nodes, Point pixel);

// Mean coverage probability over the grid cells whose centers fall in the
// field disc. Only alive nodes count. grid_resolution cells per side.
double coverage_rate(std::span<const Node> nodes, const Topology& topology,
                     int grid_resolution);

// Coverage heatmap over the bounding square: 255 covered, 0 hole, 96 outside the field.
Image coverage_map(std::span<const Node> nodes, const Topology& topology, int grid_resolution);

std::string topology_to_json(const Topology& topology, std::span<const Node> nodes);

}  // namespace corona
