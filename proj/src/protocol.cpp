#include "corona/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace corona {

std::string to_string(Protocol p) { return p == Protocol::proposed ? "proposed" : "leach"; }

Protocol protocol_from_string(const std::string& name) {
  if (name == "proposed") return Protocol::proposed;
  if (name == "leach" || name == "leach_baseline") return Protocol::leach;
  throw std::invalid_argument("unknown protocol '" + name + "'");
}

void ProtocolParams::validate() const {
  if (packet_bits <= 0) throw std::invalid_argument("packet_bits must be positive");
  if (!(ch_energy_quantile > 0.0 && ch_energy_quantile <= 1.0)) {
    throw std::invalid_argument("ch_energy_quantile must lie in (0, 1]");
  }
  if (!(initial_energy >= 0.0)) throw std::invalid_argument("initial_energy must be >= 0");
  if (!(leach_probability > 0.0 && leach_probability <= 1.0)) {
    throw std::invalid_argument("leach_probability must lie in (0, 1]");
  }
}

namespace {

// Charges cost if the node can cover it; otherwise flags the node.
bool charge(std::vector<Node>& nodes, RoundOutcome& out, int id, double cost) {
  if (out.failed[id]) return false;
  Node& n = nodes[id];
  if (n.residual_energy < cost) {
    out.failed[id] = true;
    return false;
  }
  n.residual_energy -= cost;
  out.ledger[id] += cost;
  return true;
}

RoundOutcome fresh_outcome(std::size_t n) {
  RoundOutcome out;
  out.ledger.assign(n, 0.0);
  out.failed.assign(n, false);
  return out;
}

// Nearest of the candidate node ids to `from`, ties to the lower id; -1 if empty.
int nearest(const std::vector<Node>& nodes, Point from, const std::vector<int>& candidates) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int id : candidates) {
    const double d = distance(from, nodes[id].position);
    if (d < best_d || (d == best_d && id < best)) {
      best = id;
      best_d = d;
    }
  }
  return best;
}

std::size_t shortlist_size(double quantile, std::size_t alive) {
  // Guard against 0.05 * 20 landing a hair above an integer.
  const double raw = std::ceil(quantile * static_cast<double>(alive) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, alive);
}

}  // namespace

ClusterHeads elect_cluster_heads(std::span<const Node> nodes, const Topology& topology,
                                 const ProtocolParams& params) {
  std::vector<std::vector<int>> members(topology.regions.size());
  bool any_alive = false;
  for (const Node& n : nodes) {
    if (!n.alive) continue;
    any_alive = true;
    members[n.region].push_back(n.id);
  }
  if (!any_alive) throw std::invalid_argument("elect_cluster_heads: no alive node");

  auto pos = [&](int id) { return nodes[id].position; };

  ClusterHeads heads;
  // Regions are stored corona by corona, so id order is lower coronas first.
  for (const SensingRegion& reg : topology.regions) {
    if (reg.corona < 2) continue;
    std::vector<int>& cand = members[reg.id];
    if (cand.empty()) continue;
    std::sort(cand.begin(), cand.end(), [&](int a, int b) {
      if (nodes[a].residual_energy != nodes[b].residual_energy) {
        return nodes[a].residual_energy > nodes[b].residual_energy;
      }
      return a < b;
    });
    cand.resize(shortlist_size(params.ch_energy_quantile, cand.size()));

    std::vector<Point> anchors;
    if (reg.corona >= 3) {
      for (int low : reg.lower_neighbors) {
        if (auto it = heads.find(low); it != heads.end()) anchors.push_back(pos(it->second));
      }
    }
    if (anchors.empty()) anchors.push_back(reg.center);

    int winner = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int id : cand) {
      double score = 0.0;
      for (Point a : anchors) score += distance(pos(id), a);
      if (score < best || (score == best && id < winner)) {
        best = score;
        winner = id;
      }
    }
    heads[reg.id] = winner;
  }
  return heads;
}

RoundOutcome route_data(std::vector<Node>& nodes, const Topology& topology,
                        const ClusterHeads& heads, const RadioParams& radio,
                        const ProtocolParams& params) {
  const std::int64_t k = params.packet_bits;
  RoundOutcome out = fresh_outcome(nodes.size());

  std::vector<bool> is_head(nodes.size(), false);
  for (const auto& [region, id] : heads) {
    is_head[id] = true;
    out.cluster_heads.push_back(id);
  }
  for (Node& n : nodes) n.role = is_head[n.id] ? NodeRole::cluster_head : NodeRole::normal;

  auto head_of = [&](int region) {
    auto it = heads.find(region);
    return it == heads.end() ? -1 : it->second;
  };
  auto send_to_bs = [&](int from, Tier tier) {
    const double d = distance(nodes[from].position, topology.bs_position);
    if (charge(nodes, out, from, tx_energy(radio, k, d))) {
      out.hops.push_back({from, kBaseStation, tier, true});
    }
  };

  // Packets waiting at each CH, in arrival order.
  std::vector<std::vector<int>> inbox(nodes.size());

  // Tier 1.
  for (Node& n : nodes) {
    if (!n.alive || is_head[n.id]) continue;
    const SensingRegion& reg = topology.regions[n.region];
    if (reg.corona == 1) {
      send_to_bs(n.id, Tier::direct);
      continue;
    }
    std::vector<int> cand;
    if (int h = head_of(reg.id); h >= 0) cand.push_back(h);
    for (int low : reg.lower_neighbors) {
      if (int h = head_of(low); h >= 0) cand.push_back(h);
    }
    const int target = nearest(nodes, n.position, cand);
    if (target < 0) {
      send_to_bs(n.id, Tier::fallback);
      continue;
    }
    if (charge(nodes, out, n.id, tx_energy(radio, k, distance(n.position, nodes[target].position)))) {
      inbox[target].push_back(n.id);
      out.hops.push_back({n.id, target, Tier::tier1, true});
    }
  }

  // Tiers 2 and 3, outermost corona first so every inbox is complete when read.
  std::vector<int> order;
  for (const auto& [region, id] : heads) order.push_back(region);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return topology.regions[a].corona > topology.regions[b].corona;
  });

  const double rx_cost = rx_energy(radio, k);
  for (int region : order) {
    const int h = heads.at(region);
    const SensingRegion& reg = topology.regions[region];
    std::int64_t received = 0;
    for (int sender : inbox[h]) {
      (void)sender;
      if (!charge(nodes, out, h, rx_cost)) break;
      ++received;
    }
    // Undelivered packets: flag the matching hops.
    if (received < static_cast<std::int64_t>(inbox[h].size())) {
      std::int64_t seen = 0;
      for (Hop& hop : out.hops) {
        if (hop.to == h && hop.tier != Tier::direct && seen++ >= received) hop.delivered = false;
      }
    }
    if (out.failed[h]) continue;
    if (!charge(nodes, out, h, agg_energy(radio, k, received))) continue;

    if (reg.corona >= 3) {
      std::vector<int> lower;
      for (int low : reg.lower_neighbors) {
        if (int lh = head_of(low); lh >= 0) lower.push_back(lh);
      }
      const int target = nearest(nodes, nodes[h].position, lower);
      if (target >= 0) {
        if (charge(nodes, out, h,
                   tx_energy(radio, k, distance(nodes[h].position, nodes[target].position)))) {
          inbox[target].push_back(h);
          out.hops.push_back({h, target, Tier::tier2, true});
        }
        continue;
      }
      send_to_bs(h, Tier::fallback);
      continue;
    }
    send_to_bs(h, Tier::tier3);
  }
  return out;
}

LeachState::LeachState(std::size_t node_count, std::uint64_t seed)
    : last_ch_round(node_count, std::numeric_limits<int>::min() / 2), rng(seed) {}

RoundOutcome leach_baseline_round(std::vector<Node>& nodes, const RadioParams& radio,
                                  const ProtocolParams& params, LeachState& state) {
  const std::int64_t k = params.packet_bits;
  const double p = params.leach_probability;
  const int epoch = std::max(1, static_cast<int>(std::lround(1.0 / p)));
  ++state.round;
  RoundOutcome out = fresh_outcome(nodes.size());

  const double denom = 1.0 - p * static_cast<double>((state.round - 1) % epoch);
  const double threshold = denom > 0.0 ? std::min(1.0, p / denom) : 1.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<int> heads;
  for (Node& n : nodes) {
    n.role = NodeRole::normal;
    if (!n.alive) continue;
    const double u = unit(state.rng);
    const bool eligible = state.round - state.last_ch_round[n.id] >= epoch;
    if (eligible && u < threshold) {
      n.role = NodeRole::cluster_head;
      state.last_ch_round[n.id] = state.round;
      heads.push_back(n.id);
    }
  }
  out.cluster_heads = heads;

  auto send_to_bs = [&](int from, Tier tier) {
    const double d = distance(nodes[from].position, Point{});
    if (charge(nodes, out, from, tx_energy(radio, k, d))) {
      out.hops.push_back({from, kBaseStation, tier, true});
    }
  };

  std::vector<std::vector<int>> inbox(nodes.size());
  for (Node& n : nodes) {
    if (!n.alive || n.role == NodeRole::cluster_head) continue;
    const int target = nearest(nodes, n.position, heads);
    if (target < 0) {
      send_to_bs(n.id, Tier::fallback);
      continue;
    }
    if (charge(nodes, out, n.id, tx_energy(radio, k, distance(n.position, nodes[target].position)))) {
      inbox[target].push_back(n.id);
      out.hops.push_back({n.id, target, Tier::tier1, true});
    }
  }

  const double rx_cost = rx_energy(radio, k);
  for (int h : heads) {
    std::int64_t received = 0;
    for (std::size_t i = 0; i < inbox[h].size(); ++i) {
      if (!charge(nodes, out, h, rx_cost)) break;
      ++received;
    }
    if (received < static_cast<std::int64_t>(inbox[h].size())) {
      std::int64_t seen = 0;
      for (Hop& hop : out.hops) {
        if (hop.to == h && seen++ >= received) hop.delivered = false;
      }
    }
    if (out.failed[h]) continue;
    if (!charge(nodes, out, h, agg_energy(radio, k, received))) continue;
    send_to_bs(h, Tier::tier3);
  }
  return out;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string SimReport::to_csv() const {
  std::string csv = "round,alive,total_residual_joules,ch_count\n";
  for (std::size_t i = 0; i < alive_series.size(); ++i) {
    csv += std::to_string(i + 1) + ',' + std::to_string(alive_series[i]) + ',' +
           fmt_double(energy_series[i]) + ',' + std::to_string(ch_count_series[i]) + '\n';
  }
  return csv;
}

std::string SimReport::to_json() const {
  nlohmann::json j;
  j["protocol"] = to_string(protocol);
  j["fnd"] = fnd ? nlohmann::json(*fnd) : nlohmann::json(nullptr);
  j["adt"] = adt ? nlohmann::json(*adt) : nlohmann::json(nullptr);
  j["rounds_run"] = rounds_run;
  j["initial_energy_j"] = initial_energy_total;
  j["final_alive"] = alive_series.empty() ? 0 : alive_series.back();
  j["final_residual_j"] = energy_series.empty() ? initial_energy_total : energy_series.back();
  return j.dump(2);
}

Simulator::Simulator(const NetworkConfig& config, const ProtocolParams& params,
                     const RadioParams& radio, Protocol protocol)
    : params_(params), radio_(radio), protocol_(protocol) {
  params_.validate();
  radio_.validate();
  topology_ = build_topology(config);
  Deployment dep = deploy_nodes(topology_, config, params_.initial_energy);
  nodes_ = std::move(dep.nodes);
  warnings_ = std::move(dep.warnings);
  // Independent stream from deployment so paired runs share node positions.
  leach_ = LeachState(nodes_.size(), config.seed ^ 0x9e3779b97f4a7c15ULL);
  report_.protocol = protocol;
  for (const Node& n : nodes_) report_.initial_energy_total += n.residual_energy;
}

int Simulator::alive_count() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const Node& n) { return n.alive; }));
}

void Simulator::settle_deaths(const RoundOutcome& outcome) {
  // A node that cannot afford even a zero-distance transmission is spent.
  const double floor_cost = tx_energy(radio_, params_.packet_bits, 0.0);
  for (Node& n : nodes_) {
    if (!n.alive) continue;
    if (outcome.failed[n.id] || n.residual_energy < floor_cost) {
      n.alive = false;
      n.role = NodeRole::normal;
    }
  }
}

const RoundState& Simulator::step() {
  ++state_.round_index;
  RoundOutcome outcome;
  state_.ch_assignment.clear();
  const int alive_before = alive_count();

  if (alive_before == 0) {
    outcome = fresh_outcome(nodes_.size());
  } else if (protocol_ == Protocol::proposed) {
    state_.ch_assignment = elect_cluster_heads(nodes_, topology_, params_);
    outcome = route_data(nodes_, topology_, state_.ch_assignment, radio_, params_);
  } else {
    outcome = leach_baseline_round(nodes_, radio_, params_, leach_);
    for (std::size_t i = 0; i < outcome.cluster_heads.size(); ++i) {
      state_.ch_assignment[static_cast<int>(i)] = outcome.cluster_heads[i];
    }
  }
  settle_deaths(outcome);

  state_.energy_ledger = outcome.ledger;
  state_.hops = std::move(outcome.hops);
  state_.alive.clear();
  double residual = 0.0;
  for (const Node& n : nodes_) {
    residual += n.residual_energy;
    if (n.alive) state_.alive.push_back(n.id);
  }
  for (double j : state_.energy_ledger) consumed_total_ += j;

  const int alive_after = static_cast<int>(state_.alive.size());
  if (!report_.fnd && alive_after < static_cast<int>(nodes_.size())) {
    report_.fnd = state_.round_index;
  }
  if (!report_.adt && alive_after == 0) report_.adt = state_.round_index;
  report_.alive_series.push_back(alive_after);
  report_.energy_series.push_back(residual);
  report_.consumed_series.push_back(consumed_total_);
  report_.ch_count_series.push_back(static_cast<int>(outcome.cluster_heads.size()));
  report_.rounds_run = state_.round_index;
  return state_;
}

SimReport run_simulation(const NetworkConfig& config, const ProtocolParams& params,
                         const RadioParams& radio, Protocol protocol, int max_rounds,
                         const RoundObserver& observer) {
  if (max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
  Simulator sim(config, params, radio, protocol);
  for (int r = 0; r < max_rounds && !sim.all_dead(); ++r) {
    const RoundState& state = sim.step();
    if (observer) observer(state, sim.nodes());
  }
  return sim.report();
}

}  // namespace corona
