#include "kinrl/learning.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "kinrl/format.hpp"

namespace kinrl {

void LearnerConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("learner alpha must lie in (0, 1]");
    if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) throw std::invalid_argument("learner epsilon0 must lie in [0, 1]");
    if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("learner decay must lie in (0, 1]");
    if (!(epsilon_min >= 0.0 && epsilon_min <= epsilon0))
        throw std::invalid_argument("learner epsilon_min must lie in [0, epsilon0]");
    if (!std::isfinite(q_init)) throw std::invalid_argument("learner q_init must be finite");
}

double decay_reaching(double epsilon0, double target, std::uint64_t steps) {
    if (steps == 0 || !(target > 0.0) || !(epsilon0 > 0.0) || target >= epsilon0) return 1.0;
    return std::pow(target / epsilon0, 1.0 / static_cast<double>(steps));
}

double epsilon_at(const LearnerConfig& config, std::uint64_t t) {
    return std::max(config.epsilon_min, config.epsilon0 * std::pow(config.decay, static_cast<double>(t)));
}

Greedy greedy_action(const QTable& table, std::size_t state) {
    const double c = table.value(state, Action::cooperate);
    const double d = table.value(state, Action::defect);
    if (c > d) return Greedy::cooperate;
    if (d > c) return Greedy::defect;
    return Greedy::tie;
}

Action select_action(const QTable& table, std::size_t state, double epsilon, Rng& rng) {
    if (rng.bernoulli(epsilon)) return rng.coin() ? Action::cooperate : Action::defect;
    switch (greedy_action(table, state)) {
        case Greedy::cooperate: return Action::cooperate;
        case Greedy::defect: return Action::defect;
        case Greedy::tie: break;
    }
    return rng.coin() ? Action::cooperate : Action::defect;
}

void write_q_tables(std::ostream& out, std::span<const QTable> tables) {
    out << "agent,state,action,value\n";
    for (std::size_t agent = 0; agent < tables.size(); ++agent)
        for (std::size_t s = 0; s < tables[agent].states(); ++s)
            for (Action a : all_actions)
                out << agent << ',' << s << ',' << symbol(a) << ',' << format_number(tables[agent].value(s, a)) << '\n';
}

}  // namespace kinrl
