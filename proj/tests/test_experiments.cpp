#include <doctest.h>

#include <cmath>
#include <map>

#include "kinrl/experiments.hpp"

using namespace kinrl;

namespace {

RunConfig discrimination(GenotypeSpace space, double b, bool inclusive, std::uint64_t steps = 6000) {
    ExperimentConfig c;
    c.space = space;
    c.c_over_b = {1.0 / b};
    c.inclusive = {inclusive};
    c.steps_max = steps;
    c.window = 300;
    c.seeds = {1};
    return expand_tasks(c).front().config;
}

RunConfig dispersal(double b_over_c, double eta, bool inclusive, std::uint64_t steps = 4000) {
    ExperimentConfig c = ExperimentConfig::dispersal_defaults();
    c.b_over_c = {b_over_c};
    c.etas = {eta};
    c.inclusive = {inclusive};
    c.steps_max = steps;
    c.window = 300;
    c.seeds = {1};
    return expand_tasks(c).front().config;
}

// Mean cooperation frequency per similarity bin over several seeds.
std::map<double, double> binned(const RunConfig& rc, std::uint64_t seeds) {
    std::vector<RunResult> runs;
    for (std::uint64_t s = 1; s <= seeds; ++s) runs.push_back(run_experiment(rc, s));
    std::map<double, double> out;
    for (const AggregateRow& row : aggregate(runs, Binning::by_similarity)) out[row.key[1]] = row.mean;
    return out;
}

RunResult with_value(double v) {
    RunResult r;
    r.point = {0.5, 0.0, true};
    r.observations = {{0, 1, 0.5, v}};
    return r;
}

}  // namespace

TEST_CASE("convergence detection") {
    const std::vector<Greedy> a{Greedy::cooperate, Greedy::defect}, b{Greedy::defect, Greedy::defect};
    const std::vector<std::vector<Greedy>> steady(5, a);
    CHECK(detect_convergence(steady, 5, true));
    CHECK_FALSE(detect_convergence(steady, 5, false));
    CHECK_FALSE(detect_convergence(steady, 6, true));
    auto flipped = steady;
    flipped[2] = b;
    CHECK_FALSE(detect_convergence(flipped, 5, true));
    CHECK(detect_convergence(flipped, 2, true));

    ConvergenceMonitor m(3);
    CHECK_FALSE(m.observe(a, true));
    CHECK_FALSE(m.observe(a, true));
    CHECK(m.observe(a, true));
    CHECK_FALSE(m.observe(b, true));
    CHECK_FALSE(m.observe(b, false));
    CHECK(m.stable_for() == 2);
}

TEST_CASE("aggregation") {
    const std::vector<RunResult> single{with_value(0.3)};
    auto rows = aggregate(single, Binning::by_similarity);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean == 0.3);
    CHECK(rows[0].std_error == 0.0);
    CHECK(rows[0].seeds == 1);

    const std::vector<RunResult> same{with_value(0.3), with_value(0.3)};
    CHECK(aggregate(same, Binning::by_similarity)[0].std_error == 0.0);

    const std::vector<RunResult> split{with_value(0.0), with_value(1.0)};
    rows = aggregate(split, Binning::by_similarity);
    CHECK(rows[0].mean == 0.5);
    CHECK(rows[0].std_error == doctest::Approx(0.5));
    CHECK(rows[0].key == std::vector<double>{0.5, 0.5});

    CHECK_THROWS(aggregate(std::span<const RunResult>{}, Binning::by_similarity));
}

TEST_CASE("sweep expansion") {
    CHECK(expand_tasks(ExperimentConfig::discrimination_defaults()).size() == 15);
    const auto tasks = expand_tasks(ExperimentConfig::dispersal_defaults());
    CHECK(tasks.size() == 360);
    CHECK(tasks.front().config.game.benefit == 2.0);

    const auto d = expand_tasks(ExperimentConfig::discrimination_defaults());
    CHECK(d[0].config.game.benefit == 4.0);
    CHECK(d[5].config.game.benefit == 2.5);
    CHECK(d[10].config.game.benefit == doctest::Approx(10.0 / 7));

    ExperimentConfig bad = ExperimentConfig::dispersal_defaults();
    bad.etas = {0.01};
    CHECK_THROWS_AS(expand_tasks(bad), InfeasiblePartition);
    ExperimentConfig two = ExperimentConfig::discrimination_defaults();
    two.inclusive = {true, false};
    CHECK_THROWS(expand_tasks(two));
}

TEST_CASE("derived decay reaches the target at 80% of the budget") {
    ExperimentConfig c;
    c.steps_max = 10000;
    const LearnerConfig l = resolve_learner(c);
    CHECK(std::abs(l.epsilon0 * std::pow(l.decay, 8000) - 0.01) < 1e-9);
    c.decay = 0.99;
    CHECK(resolve_learner(c).decay == 0.99);
}

TEST_CASE("discrimination follows the Hamilton threshold") {
    // c/b = 0.2 sits between the lattice points 1/6 and 1/3.
    const auto bins = binned(discrimination(GenotypeSpace(6, 2), 5.0, true, 10000), 5);
    REQUIRE(bins.size() == 7);
    for (const auto& [h, freq] : bins) {
        if (h >= 1.0 / 3 - 1e-9) CHECK(freq > 0.85);
        if (h <= 1.0 / 6 + 1e-9) CHECK(freq < 0.15);
    }
    double prev = -1;
    for (const auto& [h, freq] : bins) {
        CHECK(freq >= prev - 0.05);
        prev = freq;
    }
}

TEST_CASE("selfish discrimination defects everywhere") {
    const auto bins = binned(discrimination(GenotypeSpace(4, 2), 5.0, false), 3);
    for (const auto& [h, freq] : bins) CHECK(freq < 0.05);
}

TEST_CASE("the self-state learns to cooperate") {
    // One locus, two agents; state i of agent i is the self-game.
    const RunResult r = run_experiment(discrimination(GenotypeSpace(1, 2), 3.0, true), 1);
    for (const Observation& o : r.observations)
        if (o.agent == o.state) CHECK(o.coop_freq == 1.0);
}

TEST_CASE("zero similarity override matches the selfish runner exactly") {
    for (std::uint64_t seed : {1, 2, 3}) {
        RunConfig inclusive = discrimination(GenotypeSpace(3, 2), 4.0, true, 3000);
        inclusive.similarity_override = 0.0;
        const RunConfig selfish = discrimination(GenotypeSpace(3, 2), 4.0, false, 3000);
        const RunResult a = run_experiment(inclusive, seed), b = run_experiment(selfish, seed);
        CHECK(a.observations == b.observations);
        CHECK(a.final_greedy == b.final_greedy);
        CHECK(a.steps_run == b.steps_run);

        RunConfig din = dispersal(6, 0.1, true, 2000);
        din.similarity_override = 0.0;
        const RunResult c = run_experiment(din, seed), d = run_experiment(dispersal(6, 0.1, false, 2000), seed);
        CHECK(c.observations == d.observations);
        CHECK(c.final_greedy == d.final_greedy);
        CHECK(c.cooperator_proportion == d.cooperator_proportion);
    }
}

TEST_CASE("runs are deterministic and independent of the thread count") {
    const RunConfig rc = dispersal(8, 0.1, true, 1500);
    CHECK(run_experiment(rc, 4) == run_experiment(rc, 4));

    ExperimentConfig c = ExperimentConfig::dispersal_defaults();
    c.b_over_c = {4, 10};
    c.etas = {0.1};
    c.seeds = {1, 2, 3};
    c.steps_max = 1500;
    c.window = 200;
    const auto tasks = expand_tasks(c);
    const auto serial = run_tasks(tasks, 1), parallel = run_tasks(tasks, 4);
    CHECK(serial == parallel);
}

TEST_CASE("step accounting") {
    const RunResult r = run_experiment(dispersal(10, 0.5, true, 3000), 2);
    CHECK(r.steps_run <= 3000);
    if (r.converged_at) {
        CHECK(*r.converged_at == r.steps_run);
    } else {
        CHECK(r.steps_run == 3000);
    }
    CHECK(r.node_count == 64);
}

TEST_CASE("cliques of clones cooperate") {
    RunConfig rc = dispersal(10, 0.1, true);
    rc.probs_override = PartitionProbs{1.0, 0.0};
    double total = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const RunResult r = run_experiment(rc, seed);
        CHECK(r.degree.min_degree == 7);
        for (const Observation& o : r.observations) CHECK(o.similarity == 1.0);
        total += r.cooperator_proportion;
    }
    CHECK(total / 3 > 0.9);
}

TEST_CASE("agents behave alike under genotype relabelling") {
    // The complete network over all genotypes looks the same from every
    // agent, so per-agent cooperation curves agree up to learning noise.
    const RunConfig rc = discrimination(GenotypeSpace(4, 2), 2.5, true, 6000);
    std::map<std::size_t, std::map<double, std::pair<double, int>>> per_agent;
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
        for (const Observation& o : run_experiment(rc, seed).observations) {
            auto& cell = per_agent[o.agent][o.similarity];
            cell.first += o.coop_freq;
            ++cell.second;
        }
    std::map<double, std::vector<double>> curves;
    for (const auto& [agent, bins] : per_agent)
        for (const auto& [h, cell] : bins) curves[h].push_back(cell.first / cell.second);
    for (const auto& [h, values] : curves) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        CHECK(*hi - *lo < 0.35);
    }
}

TEST_CASE("run config validation") {
    RunConfig rc;
    rc.window = 0;
    CHECK_THROWS(rc.validate());
    rc = RunConfig{};
    rc.steps_max = 100;
    CHECK_THROWS(rc.validate());
    rc = RunConfig{};
    rc.similarity_override = 2.0;
    CHECK_THROWS(rc.validate());
}
