#include "kinrl/popreward.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

#include "kinrl/format.hpp"

namespace kinrl {

PopulationState::PopulationState(std::vector<LivingAgent> alive) : alive_(std::move(alive)) {
    std::set<AgentId> ids;
    for (const LivingAgent& a : alive_) {
        if (!ids.insert(a.id).second) throw std::invalid_argument("duplicate agent id " + std::to_string(a.id));
        ++counts_[a.genotype];
    }
}

std::vector<Genotype> PopulationState::unique_genotypes() const {
    std::vector<Genotype> out;
    out.reserve(counts_.size());
    for (const auto& [g, count] : counts_) out.push_back(g);
    return out;
}

double longevity_reward(const Genotype& me, const PopulationState& state) {
    double total = 0.0;
    for (const auto& [g, count] : state.genotype_counts()) total += hamming_similarity(me, g);
    return total;
}

double combined_reward(const Genotype& me, const PopulationState& state) {
    double total = 0.0;
    for (const LivingAgent& a : state.alive()) total += hamming_similarity(me, a.genotype);
    return total;
}

double replication_reward(const Genotype& me, const PopulationState& prev, const PopulationState& curr) {
    // +h per newborn, -h per death, matched by agent id.
    std::set<AgentId> before;
    for (const LivingAgent& a : prev.alive()) before.insert(a.id);
    double total = 0.0;
    for (const LivingAgent& a : curr.alive()) {
        if (!before.erase(a.id)) total += hamming_similarity(me, a.genotype);
    }
    for (const LivingAgent& a : prev.alive())
        if (before.count(a.id)) total -= hamming_similarity(me, a.genotype);
    return total;
}

double AgentRewards::get(RewardKind kind) const {
    switch (kind) {
        case RewardKind::longevity: return longevity;
        case RewardKind::replication: return replication;
        case RewardKind::combined: break;
    }
    return combined;
}

RandomReproducePolicy::RandomReproducePolicy(double probability) : probability_(probability) {
    if (!(probability >= 0.0 && probability <= 1.0))
        throw std::invalid_argument("reproduction probability must lie in [0, 1]");
}

QLearningReproducePolicy::QLearningReproducePolicy(LearnerConfig learner, RewardKind optimized)
    : config_(learner), optimized_(optimized) {
    config_.validate();
}

QLearningReproducePolicy::Learner& QLearningReproducePolicy::learner(AgentId agent) {
    auto [it, inserted] = learners_.try_emplace(agent);
    if (inserted) it->second.table = QTable(1, config_.q_init);
    return it->second;
}

bool QLearningReproducePolicy::wants_to_reproduce(const SandboxAgent& agent, Rng& rng) {
    Learner& l = learner(agent.id);
    const Action a = select_action(l.table, 0, epsilon_at(config_, l.decisions), rng);
    ++l.decisions;
    l.pending = a;
    return a == Action::cooperate;
}

void QLearningReproducePolicy::on_birth(AgentId parent, AgentId child) {
    Learner inherited;
    inherited.table = learner(parent).table;
    learners_[child] = inherited;
}

void QLearningReproducePolicy::on_reward(AgentId agent, const AgentRewards& rewards) {
    auto it = learners_.find(agent);
    if (it == learners_.end() || !it->second.pending) return;
    it->second.table.update(0, *it->second.pending, rewards.get(optimized_), config_.alpha);
    it->second.pending.reset();
}

void QLearningReproducePolicy::on_death(AgentId agent) { learners_.erase(agent); }

const QTable* QLearningReproducePolicy::table(AgentId agent) const {
    auto it = learners_.find(agent);
    return it == learners_.end() ? nullptr : &it->second.table;
}

void SandboxConfig::validate() const {
    if (space.loci < 1 || space.variants < 2) throw std::invalid_argument("invalid genotype space");
    if (!space.contains(initial)) throw std::invalid_argument("initial genotype " + initial.str() + " is outside the genotype space");
    if (!(mutation.mu >= 0.0 && mutation.mu <= 1.0)) throw std::invalid_argument("mutation probability must lie in [0, 1]");
    if (!(initial_health > 0.0) || !std::isfinite(initial_health))
        throw std::invalid_argument("initial health must be positive");
}

namespace {

PopulationState state_of(const std::vector<SandboxAgent>& agents) {
    std::vector<LivingAgent> alive;
    alive.reserve(agents.size());
    for (const SandboxAgent& a : agents) alive.push_back({a.id, a.genotype});
    return PopulationState(std::move(alive));
}

double total_health(const std::vector<SandboxAgent>& agents) {
    double sum = 0.0;
    for (const SandboxAgent& a : agents) sum += a.health;
    return sum;
}

// Rewards for every agent of `curr`, sharing work between equal genotypes.
std::vector<AgentRewards> rewards_for(const PopulationState& prev, const PopulationState& curr) {
    std::map<Genotype, AgentRewards> per_genotype;
    for (const auto& [g, copies] : curr.genotype_counts()) {
        AgentRewards r{0.0, 0.0, 0.0};
        for (const auto& [other, count] : curr.genotype_counts()) {
            const double h = hamming_similarity(g, other);
            r.longevity += h;
            r.combined += h * static_cast<double>(count);
        }
        double before = 0.0;
        for (const auto& [other, count] : prev.genotype_counts())
            before += hamming_similarity(g, other) * static_cast<double>(count);
        r.replication = r.combined - before;
        per_genotype.emplace(g, r);
    }
    std::vector<AgentRewards> out;
    out.reserve(curr.size());
    for (const LivingAgent& a : curr.alive()) out.push_back(per_genotype.at(a.genotype));
    return out;
}

}  // namespace

bool PopulationTrace::consistent() const {
    for (std::size_t k = 1; k < steps.size(); ++k) {
        std::set<AgentId> before, after;
        for (const LivingAgent& a : steps[k - 1].state.alive()) before.insert(a.id);
        for (const LivingAgent& a : steps[k].state.alive()) after.insert(a.id);
        for (AgentId id : steps[k].births) {
            if (before.count(id)) return false;
            before.insert(id);
        }
        for (const SandboxAgent& d : steps[k].deaths) {
            if (!before.erase(d.id)) return false;
        }
        if (before != after) return false;
    }
    return true;
}

PopulationTrace run_sandbox(const SandboxConfig& config, ReproductionPolicy& policy, Rng& rng) {
    config.validate();
    PopulationTrace trace;
    if (config.steps == 0) return trace;

    AgentId next_id = 0;
    std::vector<SandboxAgent> agents{{next_id++, config.initial, config.initial_health}};
    {
        TraceStep first;
        first.state = state_of(agents);
        first.agents = agents;
        first.births.push_back(agents.front().id);
        first.ledger = {0, 0.0, 0.0, total_health(agents)};
        trace.steps.push_back(std::move(first));
    }
    {
        const std::vector<AgentRewards> rewards = rewards_for(PopulationState{}, trace.steps.front().state);
        for (std::size_t k = 0; k < agents.size(); ++k) policy.on_reward(agents[k].id, rewards[k]);
    }

    for (std::uint64_t t = 1; t <= config.steps; ++t) {
        TraceStep step;
        step.t = t;
        step.ledger.population_before = agents.size();
        step.ledger.health_before = total_health(agents);

        for (SandboxAgent& a : agents) a.health -= 1.0;

        for (std::uint64_t unit = 0; unit < config.food_per_step && !agents.empty(); ++unit) {
            SandboxAgent& eater = agents[rng.below(agents.size())];
            const double gain = std::clamp(config.initial_health - eater.health, 0.0, 1.0);
            eater.health += gain;
            step.ledger.food_consumed += gain;
        }

        // Only agents alive at the start of the step may reproduce.
        const std::size_t parents = agents.size();
        for (std::size_t k = 0; k < parents; ++k) {
            if (agents[k].health <= 0.0) continue;
            if (!policy.wants_to_reproduce(agents[k], rng)) continue;
            const double transfer = agents[k].health / 4.0;
            agents[k].health -= transfer;
            SandboxAgent child{next_id++, mutate(agents[k].genotype, config.space, config.mutation, rng), transfer};
            step.births.push_back(child.id);
            policy.on_birth(agents[k].id, child.id);
            agents.push_back(std::move(child));
        }

        step.ledger.health_after = total_health(agents);
        std::vector<SandboxAgent> survivors;
        survivors.reserve(agents.size());
        for (SandboxAgent& a : agents) {
            if (a.health <= 0.0) {
                policy.on_death(a.id);
                step.deaths.push_back(std::move(a));
            } else {
                survivors.push_back(std::move(a));
            }
        }
        agents = std::move(survivors);

        step.state = state_of(agents);
        step.agents = agents;
        const PopulationState& prev = trace.steps.back().state;
        const std::vector<AgentRewards> rewards = rewards_for(prev, step.state);
        trace.steps.push_back(std::move(step));
        for (std::size_t k = 0; k < agents.size(); ++k) policy.on_reward(agents[k].id, rewards[k]);

        if (agents.empty()) {
            trace.extinct_at = t;
            break;
        }
    }
    return trace;
}

std::vector<RewardRow> compute_rewards(const PopulationTrace& trace) {
    std::vector<RewardRow> rows;
    const PopulationState empty;
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const TraceStep& step = trace.steps[k];
        const PopulationState& prev = k == 0 ? empty : trace.steps[k - 1].state;
        const std::vector<AgentRewards> rewards = rewards_for(prev, step.state);
        for (std::size_t a = 0; a < step.agents.size(); ++a) rows.push_back({step.t, step.agents[a].id, rewards[a]});
    }
    return rows;
}

void write_trace_csv(std::ostream& out, const PopulationTrace& trace) {
    out << "t,agent_id,genotype,health,event\n";
    for (const TraceStep& step : trace.steps) {
        struct Row {
            const SandboxAgent* agent;
            const char* event;
        };
        std::vector<Row> rows;
        const std::set<AgentId> born(step.births.begin(), step.births.end());
        for (const SandboxAgent& a : step.agents) rows.push_back({&a, born.count(a.id) ? "birth" : "none"});
        for (const SandboxAgent& a : step.deaths) rows.push_back({&a, "death"});
        std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.agent->id < y.agent->id; });
        for (const Row& r : rows)
            out << step.t << ',' << r.agent->id << ',' << r.agent->genotype.str() << ','
                << format_number(r.agent->health) << ',' << r.event << '\n';
    }
}

void write_rewards_csv(std::ostream& out, const std::vector<RewardRow>& rows) {
    out << "t,agent_id,r_longevity,r_replication,r_combined\n";
    for (const RewardRow& r : rows)
        out << r.t << ',' << r.agent << ',' << format_number(r.rewards.longevity) << ','
            << format_number(r.rewards.replication) << ',' << format_number(r.rewards.combined) << '\n';
}

IdentityReport check_reward_identities(const PopulationTrace& trace, const std::vector<RewardRow>& rows) {
    IdentityReport report;
    // Combined reward of each living genotype at each step, recomputed from
    // the full multiset rather than from the grouped counts.
    std::map<AgentId, Genotype> genotype_of;
    for (const TraceStep& step : trace.steps)
        for (const LivingAgent& a : step.state.alive()) genotype_of.emplace(a.id, a.genotype);

    struct Span {
        double replication_sum = 0.0;
        double first_combined = 0.0;
        double last_combined = 0.0;
        std::uint64_t first_t = 0;
        bool seen = false;
    };
    std::map<AgentId, Span> spans;
    std::map<std::uint64_t, std::size_t> index_of_t;
    for (std::size_t k = 0; k < trace.steps.size(); ++k) index_of_t[trace.steps[k].t] = k;

    const PopulationState empty;
    for (const RewardRow& row : rows) {
        const std::size_t k = index_of_t.at(row.t);
        const Genotype& me = genotype_of.at(row.agent);
        const PopulationState& prev = k == 0 ? empty : trace.steps[k - 1].state;
        const double combined_now = combined_reward(me, trace.steps[k].state);
        const double combined_before = combined_reward(me, prev);
        const double delta = combined_now - combined_before;
        report.max_replication_gap = std::max(report.max_replication_gap, std::abs(row.rewards.replication - delta));
        report.max_replication_gap = std::max(report.max_replication_gap,
                                              std::abs(replication_reward(me, prev, trace.steps[k].state) - delta));
        report.max_replication_gap =
            std::max(report.max_replication_gap, std::abs(row.rewards.combined - combined_now));
        if (row.rewards.longevity > row.rewards.combined + 1e-12) report.longevity_dominated = false;

        Span& s = spans[row.agent];
        if (!s.seen) {
            s.seen = true;
            s.first_t = row.t;
            s.first_combined = combined_before;
        }
        s.replication_sum += row.rewards.replication;
        s.last_combined = combined_now;
        ++report.checked;
    }
    // Sum of replication rewards over an agent's lifetime telescopes to the
    // change in combined reward across it.
    for (const auto& [id, s] : spans)
        report.max_telescoping_gap =
            std::max(report.max_telescoping_gap, std::abs(s.replication_sum - (s.last_combined - s.first_combined)));
    return report;
}

}  // namespace kinrl
