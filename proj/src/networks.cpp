#include "kinrl/networks.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <string>

namespace kinrl {

NetworkTopology::NetworkTopology(std::size_t node_count, std::vector<Edge> edges, std::vector<Genotype> genotype_of,
                                 std::vector<std::size_t> community_of)
    : edges_(std::move(edges)), genotype_of_(std::move(genotype_of)), community_of_(std::move(community_of)),
      adjacency_(node_count) {
    if (genotype_of_.size() != node_count || community_of_.size() != node_count)
        throw std::invalid_argument("node tables do not match the node count");
    for (auto& [u, v] : edges_) {
        if (u == v) throw std::invalid_argument("self-edge on node " + std::to_string(u));
        if (u >= node_count || v >= node_count) throw std::out_of_range("edge references a missing node");
        if (u > v) std::swap(u, v);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw std::invalid_argument("duplicate edge");

    std::vector<const Genotype*> community_genotype;
    for (std::size_t u = 0; u < node_count; ++u) {
        const std::size_t c = community_of_[u];
        if (c >= community_genotype.size()) community_genotype.resize(c + 1, nullptr);
        if (!community_genotype[c])
            community_genotype[c] = &genotype_of_[u];
        else if (!(*community_genotype[c] == genotype_of_[u]))
            throw std::invalid_argument("community " + std::to_string(c) + " mixes genotypes");
    }

    for (const auto& [u, v] : edges_) {
        adjacency_[u].push_back(v);
        adjacency_[v].push_back(u);
    }
    for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

void NetworkTopology::write_edge_list(std::ostream& out) const {
    out << "u,v\n";
    for (const auto& [u, v] : edges_) out << u << ',' << v << '\n';
}

void NetworkTopology::write_node_table(std::ostream& out) const {
    out << "index,community,genotype\n";
    for (std::size_t u = 0; u < node_count(); ++u)
        out << u << ',' << community_of_[u] << ',' << genotype_of_[u].str() << '\n';
}

PartitionProbs derive_partition_probs(const PartitionSpec& spec) {
    const auto s = static_cast<double>(spec.community_size);
    const auto m = static_cast<double>(spec.community_count);
    if (spec.community_size < 2 || spec.community_count < 2)
        throw std::invalid_argument("partition network needs community size and count of at least 2");
    if (!(spec.mean_degree > 0.0)) throw std::invalid_argument("mean degree must be positive");
    if (!(spec.eta > 0.0 && spec.eta <= 1.0)) throw std::invalid_argument("dispersal coefficient eta must lie in (0, 1]");

    const double within = s - 1.0;
    const double between = s * (m - 1.0);
    const double p_in = spec.mean_degree / (within + between * spec.eta);
    const double p_out = spec.eta * p_in;
    if (p_in > 1.0 || p_out > 1.0) {
        const double min_eta = (spec.mean_degree - within) / between;
        std::string msg = "infeasible partition: eta=" + std::to_string(spec.eta) + " gives p_in=" +
                          std::to_string(p_in) + " > 1 for mean degree " + std::to_string(spec.mean_degree);
        if (min_eta <= 1.0)
            msg += "; minimal feasible eta is " + std::to_string(min_eta);
        else
            msg += "; no eta in (0, 1] reaches that mean degree";
        throw InfeasiblePartition(msg, min_eta);
    }
    return {p_in, p_out};
}

NetworkTopology build_complete_network(const std::vector<Genotype>& genotypes) {
    if (genotypes.empty()) throw std::invalid_argument("complete network needs at least one genotype");
    const auto n = static_cast<NodeId>(genotypes.size());
    std::vector<Edge> edges;
    edges.reserve(genotypes.size() * (genotypes.size() - 1) / 2);
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    std::vector<std::size_t> community(genotypes.size());
    for (std::size_t u = 0; u < community.size(); ++u) community[u] = u;
    return NetworkTopology(genotypes.size(), std::move(edges), genotypes, std::move(community));
}

NetworkTopology build_partition_network(const PartitionSpec& spec, const std::vector<Genotype>& genotypes, Rng& rng) {
    if (genotypes.size() != spec.community_count)
        throw std::invalid_argument("need one genotype per community (" + std::to_string(spec.community_count) +
                                    "), got " + std::to_string(genotypes.size()));
    return build_partition_network(spec.community_size, derive_partition_probs(spec), genotypes, rng);
}

NetworkTopology build_partition_network(std::size_t community_size, const PartitionProbs& probs,
                                        const std::vector<Genotype>& genotypes, Rng& rng) {
    if (community_size < 1) throw std::invalid_argument("community size must be positive");
    if (!(probs.p_in >= 0.0 && probs.p_in <= 1.0 && probs.p_out >= 0.0 && probs.p_out <= 1.0))
        throw std::invalid_argument("edge probabilities must lie in [0, 1]");
    if (std::set<Genotype>(genotypes.begin(), genotypes.end()).size() != genotypes.size())
        throw std::invalid_argument("community genotypes must be distinct");

    const std::size_t n = community_size * genotypes.size();
    std::vector<Genotype> genotype_of;
    std::vector<std::size_t> community_of;
    genotype_of.reserve(n);
    community_of.reserve(n);
    for (std::size_t c = 0; c < genotypes.size(); ++c)
        for (std::size_t k = 0; k < community_size; ++k) {
            genotype_of.push_back(genotypes[c]);
            community_of.push_back(c);
        }

    // One draw per unordered pair, in lexicographic pair order.
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) {
            const double p = community_of[u] == community_of[v] ? probs.p_in : probs.p_out;
            if (rng.bernoulli(p)) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        }
    return NetworkTopology(n, std::move(edges), std::move(genotype_of), std::move(community_of));
}

DegreeStats degree_stats(const NetworkTopology& net) {
    DegreeStats stats;
    if (net.node_count() == 0) return stats;
    std::size_t total = 0;
    stats.min_degree = net.degree(0);
    for (NodeId u = 0; u < net.node_count(); ++u) {
        const std::size_t d = net.degree(u);
        total += d;
        stats.min_degree = std::min(stats.min_degree, d);
        stats.isolated_count += (d == 0);
    }
    stats.mean_degree = static_cast<double>(total) / static_cast<double>(net.node_count());
    return stats;
}

}  // namespace kinrl
