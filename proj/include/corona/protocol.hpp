#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "corona/radio_energy.hpp"
#include "corona/topology.hpp"

namespace corona {

enum class Protocol { proposed, leach };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& name);

struct ProtocolParams {
  std::int64_t packet_bits = 4000;   // k
  double ch_energy_quantile = 0.05;  // shortlist share of the most charged nodes
  double initial_energy = 0.5;       // J per node
  double leach_probability = 0.05;   // baseline CH fraction p

  void validate() const;
};

// Region id -> cluster head node id. The inner region never has an entry.
using ClusterHeads = std::map<int, int>;

inline constexpr int kBaseStation = -1;

enum class Tier {
  direct,    // inner-corona node straight to the BS
  tier1,     // normal node to a cluster head
  tier2,     // cluster head to a lower-corona cluster head
  tier3,     // innermost cluster heads to the BS
  fallback,  // no reachable cluster head; straight to the BS
};

struct Hop {
  int from = 0;
  int to = kBaseStation;
  Tier tier = Tier::tier1;
  bool delivered = true;  // false when the receiver could not pay for reception
};

struct RoundOutcome {
  std::vector<double> ledger;        // joules charged per node this round
  std::vector<Hop> hops;             // transmissions that happened
  std::vector<bool> failed;          // nodes that could not cover an operation
  std::vector<int> cluster_heads;    // node ids acting as CH this round
};

// Per-region election in increasing corona order. Shortlist is the
// ceil(quantile * alive) most charged nodes (at least one, ties to lower id).
// Corona 2: shortlisted node nearest its region center. Corona >= 3: shortlisted
// node with the smallest summed distance to the CHs of its lower neighbors.
ClusterHeads elect_cluster_heads(std::span<const Node> nodes, const Topology& topology,
                                 const ProtocolParams& params);

// Three-tier forwarding for one round. Charges residual energy in place and
// returns the ledger. A node that cannot cover an operation stops, is flagged
// in RoundOutcome::failed and transmits nothing further.
RoundOutcome route_data(std::vector<Node>& nodes, const Topology& topology,
                        const ClusterHeads& heads, const RadioParams& radio,
                        const ProtocolParams& params);

// Rotation bookkeeping for the probabilistic baseline.
struct LeachState {
  explicit LeachState(std::size_t node_count = 0, std::uint64_t seed = 0);

  std::vector<int> last_ch_round;  // round a node last served as CH
  std::mt19937_64 rng;
  int round = 0;
};

// Classic LEACH: self-election with threshold p / (1 - p (r mod 1/p)) among
// nodes that have not served in the current epoch; members join the nearest CH;
// CHs aggregate and transmit straight to the BS.
RoundOutcome leach_baseline_round(std::vector<Node>& nodes, const RadioParams& radio,
                                  const ProtocolParams& params, LeachState& state);

struct RoundState {
  int round_index = 0;
  // Proposed protocol: region id -> CH. Baseline: cluster ordinal -> CH.
  ClusterHeads ch_assignment;
  std::vector<int> alive;
  std::vector<double> energy_ledger;
  std::vector<Hop> hops;
};

struct SimReport {
  Protocol protocol = Protocol::proposed;
  std::optional<int> fnd;  // round of first node death
  std::optional<int> adt;  // round the last node died
  std::vector<int> alive_series;
  std::vector<double> energy_series;    // total residual J after each round
  std::vector<double> consumed_series;  // cumulative ledger J after each round
  std::vector<int> ch_count_series;
  double initial_energy_total = 0.0;
  int rounds_run = 0;

  // round,alive,total_residual_joules,ch_count
  std::string to_csv() const;
  std::string to_json() const;
};

class Simulator {
 public:
  Simulator(const NetworkConfig& config, const ProtocolParams& params, const RadioParams& radio,
            Protocol protocol);

  // Runs one round and returns its state. Calling after all nodes died is a no-op
  // round that still records the series.
  const RoundState& step();

  bool all_dead() const { return alive_count() == 0; }
  int alive_count() const;
  int round() const { return state_.round_index; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Topology& topology() const { return topology_; }
  const SimReport& report() const { return report_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  void settle_deaths(const RoundOutcome& outcome);

  ProtocolParams params_;
  RadioParams radio_;
  Protocol protocol_;
  Topology topology_;
  std::vector<Node> nodes_;
  std::vector<std::string> warnings_;
  LeachState leach_;
  RoundState state_;
  SimReport report_;
  double consumed_total_ = 0.0;
};

using RoundObserver = std::function<void(const RoundState&, std::span<const Node>)>;

// Steps until every node is dead or max_rounds is reached.
SimReport run_simulation(const NetworkConfig& config, const ProtocolParams& params,
                         const RadioParams& radio, Protocol protocol, int max_rounds,
                         const RoundObserver& observer = {});

}  // namespace corona
