#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kinrl/genotype.hpp"
#include "kinrl/rng.hpp"

namespace kinrl {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;  // first < second

// Static undirected interaction graph. Every node belongs to one community
// and all nodes of a community share a genotype.
class NetworkTopology {
public:
    NetworkTopology(std::size_t node_count, std::vector<Edge> edges, std::vector<Genotype> genotype_of,
                    std::vector<std::size_t> community_of);

    std::size_t node_count() const noexcept { return genotype_of_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<NodeId>& neighbors(NodeId u) const { return adjacency_[u]; }
    std::size_t degree(NodeId u) const { return adjacency_[u].size(); }
    const Genotype& genotype_of(NodeId u) const { return genotype_of_[u]; }
    std::size_t community_of(NodeId u) const { return community_of_[u]; }
    const std::vector<Genotype>& genotypes() const noexcept { return genotype_of_; }

    // "u,v" per edge, and "index,community,genotype" per node.
    void write_edge_list(std::ostream& out) const;
    void write_node_table(std::ostream& out) const;

private:
    std::vector<Edge> edges_;
    std::vector<Genotype> genotype_of_;
    std::vector<std::size_t> community_of_;
    std::vector<std::vector<NodeId>> adjacency_;
};

// Random partition (planted community) network: m communities of s nodes,
// target mean degree k_avg, dispersal coefficient eta = p_out / p_in.
struct PartitionSpec {
    std::size_t community_size = 8;
    std::size_t community_count = 8;
    double mean_degree = 9.0;
    double eta = 0.1;
};

struct PartitionProbs {
    double p_in;
    double p_out;
};

// Raised when no probability pair in [0,1] reaches the requested mean degree.
class InfeasiblePartition : public std::domain_error {
public:
    InfeasiblePartition(const std::string& what, double min_eta) : std::domain_error(what), min_eta_(min_eta) {}
    // Smallest eta for which the partition becomes feasible (> 1 when none is).
    double min_feasible_eta() const noexcept { return min_eta_; }

private:
    double min_eta_;
};

// Solves k_avg = (s-1) p_in + s (m-1) p_out with p_out = eta p_in.
PartitionProbs derive_partition_probs(const PartitionSpec& spec);

NetworkTopology build_complete_network(const std::vector<Genotype>& genotypes);

// genotypes[c] is carried by every node of community c; nodes c*s .. c*s+s-1.
NetworkTopology build_partition_network(const PartitionSpec& spec, const std::vector<Genotype>& genotypes, Rng& rng);

// Same generator with the probabilities given directly.
NetworkTopology build_partition_network(std::size_t community_size, const PartitionProbs& probs,
                                        const std::vector<Genotype>& genotypes, Rng& rng);

struct DegreeStats {
    double mean_degree = 0.0;
    std::size_t min_degree = 0;
    std::size_t isolated_count = 0;

    friend bool operator==(const DegreeStats&, const DegreeStats&) = default;
};

DegreeStats degree_stats(const NetworkTopology& net);

}  // namespace kinrl
