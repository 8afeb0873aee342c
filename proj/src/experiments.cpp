#include "kinrl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <stdexcept>
#include <thread>

namespace kinrl {

std::string to_string(ExperimentKind kind) {
    return kind == ExperimentKind::discrimination ? "discrimination" : "dispersal";
}

std::string to_string(InteractionMode mode) {
    return mode == InteractionMode::all_neighbors ? "all_neighbors" : "sampled_edge";
}

void RunConfig::validate() const {
    learner.validate();
    if (window == 0) throw std::invalid_argument("convergence window must be positive");
    if (steps_max <= window) throw std::invalid_argument("steps_max must exceed the convergence window");
    if (similarity_override && !(*similarity_override >= 0.0 && *similarity_override <= 1.0))
        throw std::invalid_argument("similarity override must lie in [0, 1]");
    if (kind == ExperimentKind::dispersal) {
        if (partition.community_count != space.cardinality())
            throw std::invalid_argument("dispersal needs one community per genotype");
        if (probs_override) {
            if (!(probs_override->p_in >= 0.0 && probs_override->p_in <= 1.0 && probs_override->p_out >= 0.0 &&
                  probs_override->p_out <= 1.0))
                throw std::invalid_argument("overridden edge probabilities must lie in [0, 1]");
        } else {
            derive_partition_probs(partition);
        }
    }
    if (space.cardinality() > max_enumerated_genotypes)
        throw std::invalid_argument("genotype space too large to enumerate");
}

namespace {

double greedy_value(Greedy g) {
    switch (g) {
        case Greedy::cooperate: return 1.0;
        case Greedy::tie: return 0.5;
        case Greedy::defect: break;
    }
    return 0.0;
}

// Shared step loop bookkeeping: convergence, and greedy frequencies over the
// final window of steps.
class Measurement {
public:
    Measurement(const RunConfig& config, std::size_t slots)
        : config_(config), monitor_(config.window), snapshot_(slots), sums_(slots, 0.0) {}

    std::vector<Greedy>& snapshot() { return snapshot_; }

    // Returns true when the run should stop after step t (1-based).
    bool after_step(std::uint64_t t, double epsilon) {
        const bool at_floor = epsilon <= config_.learner.epsilon_min;
        if (t + config_.window > config_.steps_max) {
            for (std::size_t k = 0; k < sums_.size(); ++k) sums_[k] += greedy_value(snapshot_[k]);
            ++summed_;
        }
        if (monitor_.observe(snapshot_, at_floor)) {
            converged_at_ = t;
            return true;
        }
        return false;
    }

    std::optional<std::uint64_t> converged_at() const { return converged_at_; }

    // A converged policy is constant across the window, so its snapshot is
    // the frequency; otherwise average the accumulated final-window steps.
    double frequency(std::size_t slot) const {
        if (converged_at_ || summed_ == 0) return greedy_value(snapshot_[slot]);
        return sums_[slot] / static_cast<double>(summed_);
    }

private:
    const RunConfig& config_;
    ConvergenceMonitor monitor_;
    std::vector<Greedy> snapshot_;
    std::vector<double> sums_;
    std::uint64_t summed_ = 0;
    std::optional<std::uint64_t> converged_at_;
};

// Similarities used inside rewards. The override also replaces the self-game
// weight so that h = 0 turns the inclusive reward into the individual payoff.
SimilarityMatrix similarities_for(const RunConfig& config, const std::vector<Genotype>& genotypes) {
    SimilarityMatrix sim(genotypes);
    if (config.similarity_override) sim.fill(*config.similarity_override);
    return sim;
}

double reward_for(const RunConfig& config, const PayoffPair& p, double h) {
    return config.inclusive ? inclusive_pairwise_reward(p, h) : p.self;
}

double proportion(const std::vector<Greedy>& greedy) {
    double total = 0.0;
    for (Greedy g : greedy) total += greedy_value(g);
    return greedy.empty() ? 0.0 : total / static_cast<double>(greedy.size());
}

}  // namespace

RunResult run_discrimination(const RunConfig& config, std::uint64_t seed) {
    if (config.kind != ExperimentKind::discrimination) throw std::invalid_argument("not a discrimination config");
    config.validate();

    const std::vector<Genotype> genotypes = enumerate_genotypes(config.space);
    const NetworkTopology net = build_complete_network(genotypes);
    const SimilarityMatrix genetic(genotypes);
    const SimilarityMatrix sim = similarities_for(config, genotypes);
    const std::size_t n = net.node_count();

    // Agent i keeps one state per opponent j, the self-state included.
    std::vector<QTable> tables(n, QTable(n, config.learner.q_init));
    std::vector<Action> actions(n * n, Action::defect);
    std::vector<Action> second_seat(n, Action::defect);
    Measurement measure(config, n * n);
    Rng rng = make_stream(seed, Stream::learning);

    std::uint64_t t = 0;
    while (t < config.steps_max) {
        const double epsilon = epsilon_at(config.learner, t);
        ++t;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j && !config.self_play) continue;
                actions[i * n + j] = select_action(tables[i], j, epsilon, rng);
                if (i == j) second_seat[i] = select_action(tables[i], i, epsilon, rng);
            }

        for (const auto& [u, v] : net.edges()) {
            const Action au = actions[u * n + v];
            const Action av = actions[v * n + u];
            const PayoffPair pu = pd_payoffs(au, av, config.game);
            const double h = sim(u, v);
            tables[u].update(v, au, reward_for(config, pu, h), config.learner.alpha);
            tables[v].update(u, av, reward_for(config, {pu.other, pu.self}, h), config.learner.alpha);
        }
        if (config.self_play) {
            // The self-game seats draw independently from the self-state and
            // both outcomes update it.
            for (std::size_t i = 0; i < n; ++i) {
                const Action first = actions[i * n + i];
                const Action second = second_seat[i];
                const PayoffPair p = pd_payoffs(first, second, config.game);
                const double h = sim(i, i);
                tables[i].update(i, first, reward_for(config, p, h), config.learner.alpha);
                tables[i].update(i, second, reward_for(config, {p.other, p.self}, h), config.learner.alpha);
            }
        }

        auto& snap = measure.snapshot();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) snap[i * n + j] = greedy_action(tables[i], j);
        if (measure.after_step(t, epsilon)) break;
    }

    RunResult result;
    result.kind = config.kind;
    result.point = config.point;
    result.seed = seed;
    result.steps_run = t;
    result.converged_at = measure.converged_at();
    result.node_count = n;
    result.degree = degree_stats(net);
    std::vector<Greedy> active;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            result.final_greedy.push_back(measure.snapshot()[i * n + j]);
            if (i == j && !config.self_play) continue;
            active.push_back(measure.snapshot()[i * n + j]);
            result.observations.push_back({i, j, genetic(i, j), measure.frequency(i * n + j)});
        }
    result.cooperator_proportion = proportion(active);
    return result;
}

RunResult run_dispersal(const RunConfig& config, std::uint64_t seed) {
    if (config.kind != ExperimentKind::dispersal) throw std::invalid_argument("not a dispersal config");
    config.validate();

    const std::vector<Genotype> genotypes = enumerate_genotypes(config.space);
    Rng topology_rng = make_stream(seed, Stream::topology);
    const NetworkTopology net =
        config.probs_override
            ? build_partition_network(config.partition.community_size, *config.probs_override, genotypes, topology_rng)
            : build_partition_network(config.partition, genotypes, topology_rng);
    const std::size_t n = net.node_count();

    // Community mates share a genotype, so they see h = 1.
    const SimilarityMatrix genetic(net.genotypes());
    const SimilarityMatrix sim = similarities_for(config, net.genotypes());

    std::vector<QTable> tables(n, QTable(1, config.learner.q_init));
    std::vector<Action> actions(n, Action::defect);
    std::vector<double> accrued(n, 0.0);
    std::vector<std::uint32_t> games(n, 0);
    Measurement measure(config, n);
    Rng rng = make_stream(seed, Stream::learning);

    auto play = [&](NodeId u, NodeId v) {
        const PayoffPair pu = pd_payoffs(actions[u], actions[v], config.game);
        const double h = sim(u, v);
        accrued[u] += reward_for(config, pu, h);
        accrued[v] += reward_for(config, {pu.other, pu.self}, h);
        ++games[u];
        ++games[v];
    };

    std::uint64_t t = 0;
    while (t < config.steps_max) {
        const double epsilon = epsilon_at(config.learner, t);
        ++t;
        // One action per agent, used against every neighbour this step.
        for (std::size_t i = 0; i < n; ++i) actions[i] = select_action(tables[i], 0, epsilon, rng);
        std::fill(accrued.begin(), accrued.end(), 0.0);
        std::fill(games.begin(), games.end(), 0u);

        if (config.mode == InteractionMode::all_neighbors) {
            for (const auto& [u, v] : net.edges()) play(u, v);
        } else {
            for (NodeId u = 0; u < n; ++u) {
                const auto& nb = net.neighbors(u);
                if (nb.empty()) continue;
                play(u, nb[rng.below(nb.size())]);
            }
        }

        // Mean reward keeps the update scale independent of degree.
        for (std::size_t i = 0; i < n; ++i)
            if (games[i] > 0)
                tables[i].update(0, actions[i], accrued[i] / static_cast<double>(games[i]), config.learner.alpha);

        auto& snap = measure.snapshot();
        for (std::size_t i = 0; i < n; ++i) snap[i] = greedy_action(tables[i], 0);
        if (measure.after_step(t, epsilon)) break;
    }

    RunResult result;
    result.kind = config.kind;
    result.point = config.point;
    result.seed = seed;
    result.steps_run = t;
    result.converged_at = measure.converged_at();
    result.node_count = n;
    result.degree = degree_stats(net);
    result.final_greedy = measure.snapshot();
    for (NodeId i = 0; i < n; ++i) {
        double h_sum = 0.0;
        for (NodeId j : net.neighbors(i)) h_sum += genetic(i, j);
        const double h_mean = net.degree(i) ? h_sum / static_cast<double>(net.degree(i)) : 0.0;
        result.observations.push_back({i, 0, h_mean, measure.frequency(i)});
    }
    result.cooperator_proportion = proportion(result.final_greedy);
    return result;
}

RunResult run_experiment(const RunConfig& config, std::uint64_t seed) {
    return config.kind == ExperimentKind::discrimination ? run_discrimination(config, seed)
                                                        : run_dispersal(config, seed);
}

bool detect_convergence(std::span<const std::vector<Greedy>> history, std::size_t window, bool epsilon_at_floor) {
    if (window == 0) throw std::invalid_argument("convergence window must be positive");
    if (!epsilon_at_floor || history.size() < window) return false;
    const auto& last = history.back();
    return std::all_of(history.end() - static_cast<std::ptrdiff_t>(window), history.end(),
                       [&](const std::vector<Greedy>& s) { return s == last; });
}

bool ConvergenceMonitor::observe(const std::vector<Greedy>& snapshot, bool epsilon_at_floor) {
    if (run_length_ > 0 && snapshot == last_) {
        ++run_length_;
    } else {
        last_ = snapshot;
        run_length_ = 1;
    }
    return epsilon_at_floor && run_length_ >= window_;
}

namespace {

AggregateRow summarize(std::vector<double> key, const std::vector<double>& values) {
    AggregateRow row;
    row.key = std::move(key);
    row.seeds = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - row.mean) * (v - row.mean);
        const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
        row.std_error = sd / std::sqrt(static_cast<double>(values.size()));
    }
    return row;
}

std::vector<double> parameter_key(const RunResult& r) {
    const double inclusive = r.point.inclusive ? 1.0 : 0.0;
    if (r.kind == ExperimentKind::dispersal) return {r.point.eta, r.point.ratio, inclusive};
    return {r.point.ratio, inclusive};
}

}  // namespace

std::vector<AggregateRow> aggregate(std::span<const RunResult> results, Binning binning) {
    if (results.empty()) throw std::invalid_argument("nothing to aggregate");
    const RunResult& first = results.front();
    for (const RunResult& r : results) {
        if (r.kind != first.kind || r.observations.size() != first.observations.size() ||
            r.node_count != first.node_count)
            throw std::invalid_argument("cannot aggregate runs of different shapes");
    }
    if (binning == Binning::by_similarity && first.kind != ExperimentKind::discrimination)
        throw std::invalid_argument("similarity binning applies to discrimination runs");

    std::map<std::vector<double>, std::vector<double>> groups;
    for (const RunResult& r : results) {
        if (binning == Binning::by_parameter) {
            groups[parameter_key(r)].push_back(r.cooperator_proportion);
            continue;
        }
        // Mean over the run's observations in each similarity bin, then one
        // value per seed.
        std::map<double, std::pair<double, std::size_t>> bins;
        for (const Observation& o : r.observations) {
            auto& [sum, count] = bins[o.similarity];
            sum += o.coop_freq;
            ++count;
        }
        for (const auto& [h, acc] : bins)
            groups[{r.point.ratio, h}].push_back(acc.first / static_cast<double>(acc.second));
    }

    std::vector<AggregateRow> rows;
    rows.reserve(groups.size());
    for (auto& [key, values] : groups) rows.push_back(summarize(key, values));
    return rows;
}

ExperimentConfig ExperimentConfig::discrimination_defaults() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::dispersal_defaults() {
    ExperimentConfig c;
    c.kind = ExperimentKind::dispersal;
    c.space = GenotypeSpace{3, 2};
    c.inclusive = {true, false};
    c.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    return c;
}

LearnerConfig resolve_learner(const ExperimentConfig& config) {
    LearnerConfig learner = config.learner;
    learner.decay = config.decay ? *config.decay
                                 : decay_reaching(learner.epsilon0, derived_decay_target,
                                                  static_cast<std::uint64_t>(derived_decay_fraction *
                                                                             static_cast<double>(config.steps_max)));
    return learner;
}

std::vector<SweepTask> expand_tasks(const ExperimentConfig& config) {
    if (config.seeds.empty()) throw std::invalid_argument("at least one seed is required");
    if (config.inclusive.empty()) throw std::invalid_argument("at least one inclusive mode is required");
    if (config.kind == ExperimentKind::discrimination && config.inclusive.size() != 1)
        throw std::invalid_argument("discrimination runs a single inclusive mode");

    RunConfig base;
    base.kind = config.kind;
    base.space = config.space;
    base.self_play = config.self_play;
    base.mode = config.mode;
    base.learner = resolve_learner(config);
    base.steps_max = config.steps_max;
    base.window = config.window;
    base.probs_override = config.probs_override;
    base.partition.community_size = config.community_size;
    base.partition.community_count = static_cast<std::size_t>(config.space.cardinality());
    base.partition.mean_degree = config.mean_degree;

    std::vector<RunConfig> points;
    if (config.kind == ExperimentKind::discrimination) {
        if (config.c_over_b.empty()) throw std::invalid_argument("c_over_b sweep is empty");
        for (double ratio : config.c_over_b) {
            if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("c/b must lie in (0, 1)");
            RunConfig rc = base;
            rc.game = DilemmaParams(config.cost / ratio, config.cost);
            rc.inclusive = config.inclusive.front();
            rc.point = {ratio, 0.0, rc.inclusive};
            points.push_back(rc);
        }
    } else {
        if (config.etas.empty() || config.b_over_c.empty()) throw std::invalid_argument("dispersal sweep is empty");
        for (double eta : config.etas)
            for (double ratio : config.b_over_c)
                for (bool inclusive : config.inclusive) {
                    if (!(ratio > 1.0)) throw std::invalid_argument("b/c must exceed 1");
                    RunConfig rc = base;
                    rc.partition.eta = eta;
                    rc.game = DilemmaParams(config.cost * ratio, config.cost);
                    rc.inclusive = inclusive;
                    rc.point = {ratio, eta, inclusive};
                    points.push_back(rc);
                }
    }

    std::vector<SweepTask> tasks;
    for (const RunConfig& rc : points) {
        rc.validate();
        for (std::uint64_t seed : config.seeds) tasks.push_back({rc, seed});
    }
    return tasks;
}

std::vector<RunResult> run_tasks(std::span<const SweepTask> tasks, std::size_t threads) {
    std::vector<RunResult> results(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) {
            try {
                results[k] = run_experiment(tasks[k].config, tasks[k].seed);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const std::size_t count = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(tasks.size(), 1));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < count; ++w) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

}  // namespace kinrl
