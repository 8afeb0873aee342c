#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "kinrl/games.hpp"
#include "kinrl/rng.hpp"

namespace kinrl {

// Hyperparameters of a myopic (discount 0) epsilon-greedy Q-learner.
struct LearnerConfig {
    double alpha = 0.8;
    double epsilon0 = 1.0;
    double decay = 0.999;  // per-step multiplicative factor
    double epsilon_min = 0.01;
    double q_init = 0.0;

    void validate() const;  // throws std::invalid_argument
};

// Per-step factor that takes epsilon0 down to `target` after `steps` steps.
double decay_reaching(double epsilon0, double target, std::uint64_t steps);

double epsilon_at(const LearnerConfig& config, std::uint64_t t);

// Bandit update: q + alpha (r - q).
inline double q_update(double q, double reward, double alpha) { return q + alpha * (reward - q); }

enum class Greedy : unsigned char { cooperate, defect, tie };

// Dense action values over integer states, two actions per state.
class QTable {
public:
    QTable() = default;
    QTable(std::size_t states, double q_init) : values_(states, {q_init, q_init}) {}

    std::size_t states() const noexcept { return values_.size(); }
    double value(std::size_t state, Action a) const { return values_[state][index_of(a)]; }
    void set(std::size_t state, Action a, double q) { values_[state][index_of(a)] = q; }
    void update(std::size_t state, Action a, double reward, double alpha) {
        double& q = values_[state][index_of(a)];
        q = q_update(q, reward, alpha);
    }

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::vector<std::array<double, 2>> values_;
};

Greedy greedy_action(const QTable& table, std::size_t state);

// Explores uniformly with probability epsilon, otherwise greedy with a fair
// coin on exact ties. Always consumes one uniform draw, plus one coin when
// exploring or tied.
Action select_action(const QTable& table, std::size_t state, double epsilon, Rng& rng);

// "agent,state,action,value" rows, one per entry.
void write_q_tables(std::ostream& out, std::span<const QTable> tables);

}  // namespace kinrl
