#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "kinrl/genotype.hpp"
#include "kinrl/learning.hpp"
#include "kinrl/rng.hpp"

namespace kinrl {

using AgentId = std::uint64_t;

struct LivingAgent {
    AgentId id;
    Genotype genotype;
};

// Agents alive at one time step (the multiset J_t). The set of distinct
// genotypes G_t is derived from it.
class PopulationState {
public:
    PopulationState() = default;
    explicit PopulationState(std::vector<LivingAgent> alive);  // ids must be unique

    const std::vector<LivingAgent>& alive() const noexcept { return alive_; }
    std::size_t size() const noexcept { return alive_.size(); }
    bool empty() const noexcept { return alive_.empty(); }

    // Copies per distinct genotype, ordered by genotype.
    const std::map<Genotype, std::size_t>& genotype_counts() const noexcept { return counts_; }
    std::vector<Genotype> unique_genotypes() const;

private:
    std::vector<LivingAgent> alive_;
    std::map<Genotype, std::size_t> counts_;
};

// +h for every distinct living genotype, regardless of its copy count.
double longevity_reward(const Genotype& me, const PopulationState& state);

// +h for every living agent.
double combined_reward(const Genotype& me, const PopulationState& state);

// Similarity-weighted births minus deaths between two consecutive states,
// matched by agent id. Equals the change in combined_reward.
double replication_reward(const Genotype& me, const PopulationState& prev, const PopulationState& curr);

// ── Birth-death sandbox ─────────────────────────────────────────────────────

struct SandboxAgent {
    AgentId id;
    Genotype genotype;
    double health;
};

enum class RewardKind { longevity, replication, combined };

struct AgentRewards {
    double longevity;
    double replication;
    double combined;

    double get(RewardKind kind) const;
};

// Decides each step whether a living agent reproduces. The sandbox reports
// births, deaths and per-step rewards back so learning policies can adapt.
class ReproductionPolicy {
public:
    virtual ~ReproductionPolicy() = default;
    virtual bool wants_to_reproduce(const SandboxAgent& agent, Rng& rng) = 0;
    virtual void on_birth(AgentId /*parent*/, AgentId /*child*/) {}
    virtual void on_reward(AgentId /*agent*/, const AgentRewards& /*rewards*/) {}
    virtual void on_death(AgentId /*agent*/) {}
};

class IdlePolicy final : public ReproductionPolicy {
public:
    bool wants_to_reproduce(const SandboxAgent&, Rng&) override { return false; }
};

class AlwaysReproducePolicy final : public ReproductionPolicy {
public:
    bool wants_to_reproduce(const SandboxAgent&, Rng&) override { return true; }
};

class RandomReproducePolicy final : public ReproductionPolicy {
public:
    explicit RandomReproducePolicy(double probability);
    bool wants_to_reproduce(const SandboxAgent&, Rng& rng) override { return rng.bernoulli(probability_); }

private:
    double probability_;
};

class HealthThresholdPolicy final : public ReproductionPolicy {
public:
    explicit HealthThresholdPolicy(double threshold) : threshold_(threshold) {}
    bool wants_to_reproduce(const SandboxAgent& agent, Rng&) override { return agent.health >= threshold_; }

private:
    double threshold_;
};

// Single-state bandit over {reproduce, idle}; children inherit the parent's
// table. Action::cooperate stands for "reproduce".
class QLearningReproducePolicy final : public ReproductionPolicy {
public:
    QLearningReproducePolicy(LearnerConfig learner, RewardKind optimized);
    bool wants_to_reproduce(const SandboxAgent& agent, Rng& rng) override;
    void on_birth(AgentId parent, AgentId child) override;
    void on_reward(AgentId agent, const AgentRewards& rewards) override;
    void on_death(AgentId agent) override;

    const QTable* table(AgentId agent) const;

private:
    struct Learner {
        QTable table{1, 0.0};
        std::uint64_t decisions = 0;
        std::optional<Action> pending;
    };
    Learner& learner(AgentId agent);

    LearnerConfig config_;
    RewardKind optimized_;
    std::map<AgentId, Learner> learners_;
};

struct SandboxConfig {
    GenotypeSpace space{8, 4};
    Genotype initial{std::vector<Gene>(8, 0)};
    MutationSpec mutation{};
    double initial_health = 10.0;  // also the health cap
    std::uint64_t food_per_step = 20;
    std::uint64_t steps = 1000;

    void validate() const;  // throws std::invalid_argument
};

// Health bookkeeping for one step, for conservation checks.
struct StepLedger {
    std::size_t population_before = 0;
    double health_before = 0.0;
    double food_consumed = 0.0;
    double health_after = 0.0;  // survivors, newborns and the final health of the dead
};

struct TraceStep {
    std::uint64_t t = 0;
    PopulationState state;
    std::vector<SandboxAgent> agents;  // alive at t, ascending id
    std::vector<AgentId> births;
    std::vector<SandboxAgent> deaths;  // removed at t, with final health
    StepLedger ledger;
};

struct PopulationTrace {
    std::vector<TraceStep> steps;  // steps[0] is the initial population
    std::optional<std::uint64_t> extinct_at;

    // Number of simulated transitions.
    std::uint64_t length() const noexcept { return steps.empty() ? 0 : steps.size() - 1; }

    // Consecutive states differ exactly by the recorded births and deaths.
    bool consistent() const;
};

// Starts from one agent carrying config.initial. Each step: every agent loses
// one health, food units go to uniformly drawn agents (+1 each, capped), the
// policy may trigger reproduction (child takes a quarter of the parent's
// health and a mutated genotype), then agents at health <= 0 are removed.
PopulationTrace run_sandbox(const SandboxConfig& config, ReproductionPolicy& policy, Rng& rng);

struct RewardRow {
    std::uint64_t t;
    AgentId agent;
    AgentRewards rewards;
};

// All three rewards for every living agent at every step. At t = 0 the
// previous population is taken as empty.
std::vector<RewardRow> compute_rewards(const PopulationTrace& trace);

// "t,agent_id,genotype,health,event" and "t,agent_id,r_longevity,r_replication,r_combined".
void write_trace_csv(std::ostream& out, const PopulationTrace& trace);
void write_rewards_csv(std::ostream& out, const std::vector<RewardRow>& rows);

struct IdentityReport {
    std::size_t checked = 0;
    double max_replication_gap = 0.0;   // |r_R(t) - (r_C(t) - r_C(t-1))|
    double max_telescoping_gap = 0.0;   // per agent, sum of r_R vs r_C(last) - r_C(first)
    bool longevity_dominated = true;    // r_L <= r_C everywhere
    bool passed(double tolerance = 1e-9) const {
        return longevity_dominated && max_replication_gap < tolerance && max_telescoping_gap < tolerance;
    }
};

// Checks the replication / combined identities over a reward stream.
IdentityReport check_reward_identities(const PopulationTrace& trace, const std::vector<RewardRow>& rows);

}  // namespace kinrl
