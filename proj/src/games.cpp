#include "kinrl/games.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kinrl {

namespace {

void check_relatedness(double h) {
    if (!(h >= 0.0 && h <= 1.0)) throw std::invalid_argument("relatedness must lie in [0, 1], got " + std::to_string(h));
}

}  // namespace

DilemmaParams::DilemmaParams(double benefit_, double cost_) : benefit(benefit_), cost(cost_) {
    if (!std::isfinite(benefit) || !std::isfinite(cost) || !(cost > 0.0) || !(benefit > cost))
        throw std::invalid_argument("prisoner's dilemma requires b > c > 0 (b=" + std::to_string(benefit) +
                                    ", c=" + std::to_string(cost) + ")");
}

PayoffPair pd_payoffs(Action mine, Action theirs, const DilemmaParams& params) {
    const double given = mine == Action::cooperate ? params.benefit : 0.0;
    const double received = theirs == Action::cooperate ? params.benefit : 0.0;
    const double my_cost = mine == Action::cooperate ? params.cost : 0.0;
    const double their_cost = theirs == Action::cooperate ? params.cost : 0.0;
    return {received - my_cost, given - their_cost};
}

double inclusive_pairwise_reward(const PayoffPair& p, double relatedness) {
    check_relatedness(relatedness);
    return p.self + relatedness * p.other;
}

double inclusive_reward_vector(std::span<const double> payoffs, std::span<const double> similarities,
                               std::size_t self_index) {
    if (payoffs.size() != similarities.size())
        throw std::invalid_argument("payoff and similarity vectors differ in length");
    if (self_index >= payoffs.size()) throw std::out_of_range("self index outside the population");
    if (similarities[self_index] != 1.0) throw std::invalid_argument("self-similarity must be 1");
    double total = 0.0;
    for (std::size_t j = 0; j < payoffs.size(); ++j) total += similarities[j] * payoffs[j];
    return total;
}

PayoffMatrix transformed_matrix(const DilemmaParams& params, double relatedness) {
    check_relatedness(relatedness);
    PayoffMatrix m{};
    for (Action mine : all_actions)
        for (Action theirs : all_actions)
            m[index_of(mine)][index_of(theirs)] =
                inclusive_pairwise_reward(pd_payoffs(mine, theirs, params), relatedness);
    return m;
}

bool cooperation_favored(const DilemmaParams& params, double relatedness) {
    check_relatedness(relatedness);
    return params.cost < relatedness * params.benefit;
}

}  // namespace kinrl
