#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kinrl/rng.hpp"

namespace kinrl {

using Gene = std::uint32_t;

// Fixed-length sequence of gene variants. Immutable once built.
class Genotype {
public:
    explicit Genotype(std::vector<Gene> genes);

    std::size_t length() const noexcept { return genes_.size(); }
    const std::vector<Gene>& genes() const noexcept { return genes_; }
    Gene operator[](std::size_t locus) const { return genes_[locus]; }

    // Hyphen-joined form, e.g. "1-1-0-1".
    std::string str() const;
    static Genotype parse(std::string_view text);

    friend bool operator==(const Genotype&, const Genotype&) = default;
    friend auto operator<=>(const Genotype&, const Genotype&) = default;

private:
    std::vector<Gene> genes_;
};

// All genotypes of `loci` genes with `variants` alleles each.
struct GenotypeSpace {
    std::size_t loci = 1;
    Gene variants = 2;

    GenotypeSpace() = default;
    GenotypeSpace(std::size_t loci, Gene variants);

    // v^n, saturating at UINT64_MAX.
    std::uint64_t cardinality() const noexcept;
    bool contains(const Genotype& g) const noexcept;
};

struct MutationSpec {
    double mu = 0.0;  // per-locus change probability

    MutationSpec() = default;
    explicit MutationSpec(double mu);
};

// Fraction of loci at which a and b carry the same variant.
double hamming_similarity(const Genotype& a, const Genotype& b);

// Number of agreeing loci; hamming_similarity == matching_loci / length.
std::size_t matching_loci(const Genotype& a, const Genotype& b);

inline constexpr std::uint64_t max_enumerated_genotypes = std::uint64_t{1} << 20;

// Lexicographic listing of the whole space (locus 0 most significant).
std::vector<Genotype> enumerate_genotypes(const GenotypeSpace& space);

// Each locus mutates with probability mu to one of the other v-1 variants.
Genotype mutate(const Genotype& g, const GenotypeSpace& space, const MutationSpec& spec, Rng& rng);

// Symmetric matrix of pairwise similarities, row-major.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    explicit SimilarityMatrix(const std::vector<Genotype>& population);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    std::vector<double> row(std::size_t i) const;

    // Sets every entry, diagonal included, to h.
    void fill(double h);

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

}  // namespace kinrl
