#pragma once

// Small random-input generators for property tests.

#include <cstdint>
#include <vector>

#include "kinrl/genotype.hpp"
#include "kinrl/rng.hpp"

namespace testgen {

inline kinrl::Genotype genotype(kinrl::Rng& rng, std::size_t loci, kinrl::Gene variants) {
    std::vector<kinrl::Gene> genes(loci);
    for (auto& g : genes) g = static_cast<kinrl::Gene>(rng.below(variants));
    return kinrl::Genotype(std::move(genes));
}

inline kinrl::GenotypeSpace space(kinrl::Rng& rng, std::size_t max_loci = 12, kinrl::Gene max_variants = 5) {
    return kinrl::GenotypeSpace(1 + rng.below(max_loci), static_cast<kinrl::Gene>(2 + rng.below(max_variants - 1)));
}

inline double in_range(kinrl::Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

}  // namespace testgen
