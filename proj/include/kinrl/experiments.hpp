#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kinrl/games.hpp"
#include "kinrl/genotype.hpp"
#include "kinrl/learning.hpp"
#include "kinrl/networks.hpp"

namespace kinrl {

enum class ExperimentKind { discrimination, dispersal };

// How dispersal agents meet their neighbours each step.
enum class InteractionMode {
    all_neighbors,  // every incident edge is played
    sampled_edge,   // each agent plays one uniformly drawn incident edge
};

std::string to_string(ExperimentKind kind);
std::string to_string(InteractionMode mode);

// Swept coordinates of one run, kept verbatim for reporting.
struct ParamPoint {
    double ratio = 0.0;  // c/b for discrimination, b/c for dispersal
    double eta = 0.0;    // dispersal only
    bool inclusive = true;

    friend bool operator==(const ParamPoint&, const ParamPoint&) = default;
};

// Everything needed to run one parameter point for one seed.
struct RunConfig {
    ExperimentKind kind = ExperimentKind::discrimination;
    GenotypeSpace space{6, 2};
    DilemmaParams game{4.0, 1.0};
    ParamPoint point{};
    bool inclusive = true;
    bool self_play = true;  // discrimination only
    PartitionSpec partition{};
    std::optional<PartitionProbs> probs_override;  // bypasses the mean-degree derivation
    InteractionMode mode = InteractionMode::all_neighbors;
    LearnerConfig learner{};
    std::uint64_t steps_max = 20000;
    std::uint64_t window = 500;
    // Replaces every similarity weight in the rewards, the self-game included.
    // Observations still report genetic similarity.
    std::optional<double> similarity_override;

    void validate() const;  // throws std::invalid_argument / InfeasiblePartition
};

// Cooperation frequency of one (agent, state) pair over the measurement window.
struct Observation {
    std::size_t agent;
    std::size_t state;
    double similarity;  // to the opponent (discrimination) or mean over neighbours (dispersal)
    double coop_freq;

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct RunResult {
    ExperimentKind kind = ExperimentKind::discrimination;
    ParamPoint point{};
    std::uint64_t seed = 0;
    std::uint64_t steps_run = 0;
    std::optional<std::uint64_t> converged_at;  // empty: hit steps_max unconverged
    std::vector<Observation> observations;
    std::vector<Greedy> final_greedy;  // agent-major over states
    double cooperator_proportion = 0.0;  // greedy C = 1, tie = 0.5
    std::size_t node_count = 0;
    DegreeStats degree{};

    friend bool operator==(const RunResult&, const RunResult&) = default;
};

RunResult run_discrimination(const RunConfig& config, std::uint64_t seed);
RunResult run_dispersal(const RunConfig& config, std::uint64_t seed);
RunResult run_experiment(const RunConfig& config, std::uint64_t seed);

// True iff the last `window` snapshots are identical and exploration has
// bottomed out.
bool detect_convergence(std::span<const std::vector<Greedy>> history, std::size_t window, bool epsilon_at_floor);

// Streaming form of detect_convergence: remembers only the current snapshot
// and how long it has lasted.
class ConvergenceMonitor {
public:
    explicit ConvergenceMonitor(std::size_t window) : window_(window) {}
    bool observe(const std::vector<Greedy>& snapshot, bool epsilon_at_floor);
    std::size_t stable_for() const noexcept { return run_length_; }

private:
    std::size_t window_;
    std::size_t run_length_ = 0;
    std::vector<Greedy> last_;
};

enum class Binning { by_similarity, by_parameter };

struct AggregateRow {
    // by_similarity: {c/b, h}; by_parameter: {eta, b/c, inclusive} for dispersal,
    // {c/b, inclusive} for discrimination.
    std::vector<double> key;
    double mean = 0.0;
    double std_error = 0.0;  // sample standard error over seeds
    std::size_t seeds = 0;
};

// Sorted by key. Throws std::invalid_argument on empty or mixed-shape input.
std::vector<AggregateRow> aggregate(std::span<const RunResult> results, Binning binning);

// A full sweep: the cross product of swept values and seeds.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::discrimination;
    GenotypeSpace space{6, 2};
    double cost = 1.0;
    std::vector<double> c_over_b{0.25, 0.4, 0.7};  // discrimination
    std::vector<double> b_over_c{2, 4, 6, 8, 10, 12};  // dispersal
    std::vector<double> etas{0.05, 0.1, 0.5};  // dispersal
    std::vector<bool> inclusive{true};
    bool self_play = true;
    std::size_t community_size = 8;
    double mean_degree = 9.0;
    std::optional<PartitionProbs> probs_override;
    InteractionMode mode = InteractionMode::all_neighbors;
    LearnerConfig learner{};
    std::optional<double> decay;  // empty: derived from steps_max
    std::uint64_t steps_max = 20000;
    std::uint64_t window = 500;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

    static ExperimentConfig discrimination_defaults();
    static ExperimentConfig dispersal_defaults();
};

// Exploration reaches this value at 80% of the step budget when decay is derived.
inline constexpr double derived_decay_target = 0.01;
inline constexpr double derived_decay_fraction = 0.8;

LearnerConfig resolve_learner(const ExperimentConfig& config);

struct SweepTask {
    RunConfig config;
    std::uint64_t seed;
};

// Validates every point (feasibility included) before returning.
std::vector<SweepTask> expand_tasks(const ExperimentConfig& config);

// Runs tasks on `threads` workers; results come back in task order.
std::vector<RunResult> run_tasks(std::span<const SweepTask> tasks, std::size_t threads);

}  // namespace kinrl
