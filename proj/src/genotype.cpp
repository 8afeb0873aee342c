#include "kinrl/genotype.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <stdexcept>

namespace kinrl {

Genotype::Genotype(std::vector<Gene> genes) : genes_(std::move(genes)) {
    if (genes_.empty()) throw std::invalid_argument("genotype must have at least one locus");
}

std::string Genotype::str() const {
    std::string out;
    for (std::size_t k = 0; k < genes_.size(); ++k) {
        if (k) out += '-';
        out += std::to_string(genes_[k]);
    }
    return out;
}

Genotype Genotype::parse(std::string_view text) {
    std::vector<Gene> genes;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dash = text.find('-', pos);
        const std::string_view token = text.substr(pos, dash == std::string_view::npos ? text.npos : dash - pos);
        Gene value = 0;
        const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (token.empty() || ec != std::errc{} || end != token.data() + token.size())
            throw std::invalid_argument("malformed genotype '" + std::string(text) + "'");
        genes.push_back(value);
        if (dash == std::string_view::npos) break;
        pos = dash + 1;
    }
    return Genotype(std::move(genes));
}

GenotypeSpace::GenotypeSpace(std::size_t loci_, Gene variants_) : loci(loci_), variants(variants_) {
    if (loci < 1) throw std::invalid_argument("genotype space needs at least one locus");
    if (variants < 2) throw std::invalid_argument("genotype space needs at least two variants per locus");
}

std::uint64_t GenotypeSpace::cardinality() const noexcept {
    constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < loci; ++k) {
        if (total > cap / variants) return cap;
        total *= variants;
    }
    return total;
}

bool GenotypeSpace::contains(const Genotype& g) const noexcept {
    if (g.length() != loci) return false;
    for (Gene gene : g.genes())
        if (gene >= variants) return false;
    return true;
}

MutationSpec::MutationSpec(double mu_) : mu(mu_) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mutation probability must lie in [0, 1]");
}

std::size_t matching_loci(const Genotype& a, const Genotype& b) {
    if (a.length() != b.length())
        throw std::invalid_argument("hamming similarity needs equal-length genotypes (" + std::to_string(a.length()) +
                                    " vs " + std::to_string(b.length()) + ")");
    std::size_t same = 0;
    for (std::size_t k = 0; k < a.length(); ++k) same += (a[k] == b[k]);
    return same;
}

double hamming_similarity(const Genotype& a, const Genotype& b) {
    return static_cast<double>(matching_loci(a, b)) / static_cast<double>(a.length());
}

std::vector<Genotype> enumerate_genotypes(const GenotypeSpace& space) {
    const std::uint64_t count = space.cardinality();
    if (count > max_enumerated_genotypes)
        throw std::length_error("genotype space of " + std::to_string(space.variants) + "^" +
                                std::to_string(space.loci) + " exceeds the enumeration limit of 2^20");
    std::vector<Genotype> out;
    out.reserve(count);
    std::vector<Gene> genes(space.loci, 0);
    for (std::uint64_t i = 0; i < count; ++i) {
        out.emplace_back(genes);
        // odometer increment, last locus fastest
        for (std::size_t k = space.loci; k-- > 0;) {
            if (++genes[k] < space.variants) break;
            genes[k] = 0;
        }
    }
    return out;
}

Genotype mutate(const Genotype& g, const GenotypeSpace& space, const MutationSpec& spec, Rng& rng) {
    if (spec.mu == 0.0) return g;
    std::vector<Gene> genes = g.genes();
    for (Gene& gene : genes) {
        if (!rng.bernoulli(spec.mu)) continue;
        // draw among the v-1 other variants
        auto other = static_cast<Gene>(rng.below(space.variants - 1));
        gene = other >= gene ? other + 1 : other;
    }
    return Genotype(std::move(genes));
}

SimilarityMatrix::SimilarityMatrix(const std::vector<Genotype>& population)
    : n_(population.size()), values_(n_ * n_, 1.0) {
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double h = hamming_similarity(population[i], population[j]);
            values_[i * n_ + j] = h;
            values_[j * n_ + i] = h;
        }
}

std::vector<double> SimilarityMatrix::row(std::size_t i) const {
    return {values_.begin() + static_cast<std::ptrdiff_t>(i * n_),
            values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_)};
}

void SimilarityMatrix::fill(double h) { std::fill(values_.begin(), values_.end(), h); }

}  // namespace kinrl
