#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace kinrl {

enum class Action : unsigned char { cooperate = 0, defect = 1 };

inline constexpr std::array<Action, 2> all_actions{Action::cooperate, Action::defect};

constexpr std::size_t index_of(Action a) noexcept { return static_cast<std::size_t>(a); }
constexpr char symbol(Action a) noexcept { return a == Action::cooperate ? 'C' : 'D'; }

// Donation-game form of the prisoner's dilemma: a cooperator pays c so the
// partner receives b. Requires b > c > 0.
struct DilemmaParams {
    double benefit;
    double cost;

    DilemmaParams(double benefit, double cost);
};

struct PayoffPair {
    double self;
    double other;
};

PayoffPair pd_payoffs(Action mine, Action theirs, const DilemmaParams& params);

// P_self + h * P_other, h in [0, 1].
double inclusive_pairwise_reward(const PayoffPair& p, double relatedness);

// sum_j h_ij * r_j over the whole population; the self term has weight 1.
double inclusive_reward_vector(std::span<const double> payoffs, std::span<const double> similarities,
                               std::size_t self_index);

// Row player's inclusive payoffs against a partner of relatedness h,
// indexed [own action][partner action].
using PayoffMatrix = std::array<std::array<double, 2>, 2>;
PayoffMatrix transformed_matrix(const DilemmaParams& params, double relatedness);

// Hamilton's condition c < h b (strict).
bool cooperation_favored(const DilemmaParams& params, double relatedness);

}  // namespace kinrl
