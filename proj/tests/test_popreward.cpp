#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "gen.hpp"
#include "kinrl/popreward.hpp"

using namespace kinrl;

namespace {

Genotype G(std::vector<Gene> g) { return Genotype(std::move(g)); }

PopulationState population(const std::vector<Genotype>& genotypes, AgentId first_id = 0) {
    std::vector<LivingAgent> alive;
    for (const Genotype& g : genotypes) alive.push_back({first_id++, g});
    return PopulationState(std::move(alive));
}

// Direct sums over the living agents, written independently of the library.
double oracle_combined(const Genotype& me, const PopulationState& s) {
    double total = 0;
    for (const LivingAgent& a : s.alive()) {
        std::size_t same = 0;
        for (std::size_t k = 0; k < me.length(); ++k) same += me[k] == a.genotype[k];
        total += double(same) / double(me.length());
    }
    return total;
}

double oracle_longevity(const Genotype& me, const PopulationState& s) {
    std::vector<Genotype> seen;
    double total = 0;
    for (const LivingAgent& a : s.alive()) {
        if (std::find(seen.begin(), seen.end(), a.genotype) != seen.end()) continue;
        seen.push_back(a.genotype);
        total += hamming_similarity(me, a.genotype);
    }
    return total;
}

SandboxConfig small_world(double mu, std::uint64_t steps) {
    SandboxConfig c;
    c.space = GenotypeSpace(6, 3);
    c.initial = Genotype(std::vector<Gene>(6, 0));
    c.mutation = MutationSpec(mu);
    c.steps = steps;
    return c;
}

}  // namespace

TEST_CASE("longevity reward") {
    const Genotype me = G({1, 1, 1, 1});
    CHECK(longevity_reward(me, population({me, G({1, 1, 1, 0})})) == 1.75);
    CHECK(longevity_reward(me, population({me, me, G({1, 1, 1, 0})})) == 1.75);
    CHECK(longevity_reward(me, population({me})) == 1.0);
    CHECK(longevity_reward(me, population({G({0, 0, 0, 0})})) == 0.0);
}

TEST_CASE("combined reward") {
    const Genotype me = G({1, 1, 1, 1});
    CHECK(combined_reward(me, population({me, me, G({1, 1, 1, 0})})) == 2.75);
    CHECK(combined_reward(me, PopulationState{}) == 0.0);
    CHECK(combined_reward(me, population({me})) == 1.0);
}

TEST_CASE("replication reward") {
    const Genotype me = G({1, 0, 1});
    const PopulationState before = population({me, G({0, 1, 0})});
    std::vector<LivingAgent> plus = before.alive();
    plus.push_back({7, me});
    CHECK(replication_reward(me, before, PopulationState(plus)) == 1.0);
    CHECK(replication_reward(me, before, before) == 0.0);
    const PopulationState lost({before.alive()[0]});
    CHECK(replication_reward(me, before, lost) == 0.0);
}

TEST_CASE("population state rejects duplicate ids") {
    CHECK_THROWS(PopulationState({{1, G({0})}, {1, G({1})}}));
}

TEST_CASE("reward properties on random populations") {
    Rng rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t loci = 1 + rng.below(6);
        const Gene variants = static_cast<Gene>(2 + rng.below(2));
        std::vector<Genotype> pool;
        for (std::size_t k = 0, n = 1 + rng.below(4); k < n; ++k) pool.push_back(testgen::genotype(rng, loci, variants));
        std::vector<Genotype> members;
        for (std::size_t k = 0, n = rng.below(12); k < n; ++k) members.push_back(pool[rng.below(pool.size())]);
        const PopulationState s = population(members);
        const Genotype me = pool[rng.below(pool.size())];

        const double L = longevity_reward(me, s), C = combined_reward(me, s);
        CHECK(std::abs(C - oracle_combined(me, s)) < 1e-12);
        CHECK(std::abs(L - oracle_longevity(me, s)) < 1e-12);
        CHECK(L <= C + 1e-12);
        bool singletons = true;
        for (const auto& [g, n] : s.genotype_counts()) singletons &= n == 1;
        // Equality can also occur by accident when the duplicated genotype is unrelated (h = 0).
        if (singletons) CHECK(std::abs(L - C) < 1e-12);
        if (s.genotype_counts().count(me)) CHECK(C >= 1.0);

        // Random transition: drop some agents, add some newborns.
        std::vector<LivingAgent> next;
        for (const LivingAgent& a : s.alive())
            if (rng.coin()) next.push_back(a);
        for (std::size_t k = 0, n = rng.below(4); k < n; ++k) next.push_back({100 + k, pool[rng.below(pool.size())]});
        const PopulationState s2(next);
        CHECK(std::abs(replication_reward(me, s, s2) - (oracle_combined(me, s2) - oracle_combined(me, s))) < 1e-9);
    }
}

TEST_CASE("sandbox without food goes extinct") {
    SandboxConfig c;
    c.initial_health = 5;
    c.food_per_step = 0;
    c.steps = 100;
    IdlePolicy idle;
    Rng rng(1);
    const PopulationTrace trace = run_sandbox(c, idle, rng);
    REQUIRE(trace.extinct_at.has_value());
    CHECK(*trace.extinct_at == 5);
    CHECK(trace.length() == 5);
    CHECK(trace.steps.back().state.empty());
    CHECK(trace.consistent());
}

TEST_CASE("sandbox with zero steps is empty") {
    SandboxConfig c;
    c.steps = 0;
    AlwaysReproducePolicy always;
    Rng rng(1);
    const PopulationTrace trace = run_sandbox(c, always, rng);
    CHECK(trace.steps.empty());
    std::ostringstream t, r;
    write_trace_csv(t, trace);
    write_rewards_csv(r, compute_rewards(trace));
    CHECK(t.str() == "t,agent_id,genotype,health,event\n");
    CHECK(r.str() == "t,agent_id,r_longevity,r_replication,r_combined\n");
}

TEST_CASE("mu = 0 with constant reproduction keeps one genotype") {
    SandboxConfig c = small_world(0.0, 150);
    c.food_per_step = 200;
    AlwaysReproducePolicy always;
    Rng rng(3);
    const PopulationTrace trace = run_sandbox(c, always, rng);
    const auto rows = compute_rewards(trace);
    REQUIRE(!rows.empty());
    std::map<std::uint64_t, std::size_t> size_at;
    for (const TraceStep& s : trace.steps) {
        CHECK(s.state.genotype_counts().size() <= 1);
        size_at[s.t] = s.state.size();
    }
    for (const RewardRow& r : rows) {
        CHECK(r.rewards.longevity == 1.0);
        CHECK(r.rewards.combined == double(size_at[r.t]));
    }
    CHECK(check_reward_identities(trace, rows).passed());
}

TEST_CASE("sandbox health is conserved") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        RandomReproducePolicy policy(0.15);
        Rng rng(seed);
        const PopulationTrace trace = run_sandbox(small_world(0.1, 300), policy, rng);
        CHECK(trace.consistent());
        for (std::size_t k = 1; k < trace.steps.size(); ++k) {
            const StepLedger& l = trace.steps[k].ledger;
            CHECK(l.health_after - l.health_before ==
                  doctest::Approx(-double(l.population_before) + l.food_consumed).epsilon(1e-12));
            double survivors = 0, dead = 0;
            for (const SandboxAgent& a : trace.steps[k].agents) survivors += a.health;
            for (const SandboxAgent& a : trace.steps[k].deaths) dead += a.health;
            CHECK(survivors + dead == doctest::Approx(l.health_after).epsilon(1e-12));
        }
    }
}

TEST_CASE("reward identities on random traces") {
    Rng pick(99);
    for (int trial = 0; trial < 20; ++trial) {
        const double mu = std::array{0.0, 0.05, 0.2}[pick.below(3)];
        RandomReproducePolicy policy(testgen::in_range(pick, 0.05, 0.2));
        Rng rng(pick.next());
        const PopulationTrace trace = run_sandbox(small_world(mu, 400), policy, rng);
        const auto rows = compute_rewards(trace);
        const IdentityReport report = check_reward_identities(trace, rows);
        CHECK(report.checked == rows.size());
        CHECK(report.passed());

        // Telescoping, recomputed here per agent from the row stream.
        std::map<AgentId, std::vector<const RewardRow*>> by_agent;
        for (const RewardRow& r : rows) by_agent[r.agent].push_back(&r);
        for (const auto& [id, seq] : by_agent) {
            double sum = 0;
            for (std::size_t k = 1; k < seq.size(); ++k) sum += seq[k]->rewards.replication;
            CHECK(std::abs(sum - (seq.back()->rewards.combined - seq.front()->rewards.combined)) < 1e-9);
        }
    }
}

TEST_CASE("first step treats the previous population as empty") {
    SandboxConfig c = small_world(0.0, 1);
    IdlePolicy idle;
    Rng rng(1);
    const auto rows = compute_rewards(run_sandbox(c, idle, rng));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].t == 0);
    CHECK(rows[0].rewards.replication == 1.0);
    CHECK(rows[1].rewards.replication == 0.0);
}

TEST_CASE("sandbox is deterministic per seed") {
    auto run = [](std::uint64_t seed) {
        RandomReproducePolicy policy(0.1);
        Rng rng(seed);
        std::ostringstream out;
        write_trace_csv(out, run_sandbox(small_world(0.05, 200), policy, rng));
        return out.str();
    };
    CHECK(run(5) == run(5));
    CHECK(run(5) != run(6));
}

TEST_CASE("trace csv rows") {
    SandboxConfig c;
    c.space = GenotypeSpace(2, 2);
    c.initial = G({0, 1});
    c.initial_health = 2;
    c.food_per_step = 0;
    c.steps = 5;
    IdlePolicy idle;
    Rng rng(1);
    std::ostringstream out;
    write_trace_csv(out, run_sandbox(c, idle, rng));
    CHECK(out.str() == "t,agent_id,genotype,health,event\n0,0,0-1,2,birth\n1,0,0-1,1,none\n2,0,0-1,0,death\n");
}

TEST_CASE("q-learning policy passes its table to children") {
    LearnerConfig l;
    l.epsilon0 = 0.0;
    l.epsilon_min = 0.0;
    QLearningReproducePolicy policy(l, RewardKind::replication);
    Rng rng(1);
    const SandboxAgent parent{0, G({0}), 5};
    const bool first = policy.wants_to_reproduce(parent, rng);
    policy.on_reward(0, {1.0, 2.0, 3.0});
    const QTable* t = policy.table(0);
    REQUIRE(t);
    CHECK(t->value(0, first ? Action::cooperate : Action::defect) == doctest::Approx(l.alpha * 2.0));
    policy.on_birth(0, 1);
    REQUIRE(policy.table(1));
    CHECK(*policy.table(1) == *policy.table(0));
    policy.on_death(0);
    CHECK(policy.table(0) == nullptr);
}

TEST_CASE("sandbox validation") {
    SandboxConfig c;
    c.initial = G({0, 0});
    CHECK_THROWS(c.validate());
    c = SandboxConfig{};
    c.initial_health = 0;
    CHECK_THROWS(c.validate());
    CHECK_THROWS(RandomReproducePolicy(1.5));
}
