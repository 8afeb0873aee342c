#include "kinrl/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

#include "json.hpp"

namespace kinrl::cli {

std::string to_string(Command command) {
    switch (command) {
        case Command::discrimination: return "discrimination";
        case Command::dispersal: return "dispersal";
        case Command::sandbox: break;
    }
    return "sandbox";
}

std::unique_ptr<ReproductionPolicy> make_policy(const PolicySpec& spec) {
    if (spec.kind == "idle") return std::make_unique<IdlePolicy>();
    if (spec.kind == "always") return std::make_unique<AlwaysReproducePolicy>();
    if (spec.kind == "random") return std::make_unique<RandomReproducePolicy>(spec.probability);
    if (spec.kind == "threshold") return std::make_unique<HealthThresholdPolicy>(spec.threshold);
    if (spec.kind == "qlearning") return std::make_unique<QLearningReproducePolicy>(spec.learner, spec.reward);
    throw std::invalid_argument("unknown policy kind '" + spec.kind + "'");
}

std::filesystem::path default_output_dir(Command command) {
    const char* env = std::getenv("KINRL_OUTPUT_DIR");
    const std::filesystem::path base = env && *env ? std::filesystem::path(env) : std::filesystem::path("kinrl-out");
    return base / to_string(command);
}

std::vector<Override> parse_overrides(const std::vector<std::string>& args) {
    std::vector<Override> out;
    for (const std::string& arg : args) {
        const auto eq = arg.find('=');
        if (arg.rfind("--", 0) != 0 || eq == std::string::npos || eq == 2)
            throw ConfigError("unrecognized argument '" + arg + "' (overrides take the form --key=value)");
        out.push_back({arg.substr(2, eq - 2), arg.substr(eq + 1)});
    }
    return out;
}

namespace {

std::vector<std::string> split_path(const std::string& key) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const auto dot = key.find('.', pos);
        parts.push_back(key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos));
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return parts;
}

void assign_path(YAML::Node node, const std::vector<std::string>& parts, std::size_t idx, const YAML::Node& value) {
    if (idx + 1 == parts.size()) {
        node[parts[idx]] = value;
        return;
    }
    YAML::Node child = node[parts[idx]];
    if (!child.IsMap()) child = YAML::Node(YAML::NodeType::Map);
    assign_path(child, parts, idx + 1, value);
}

// Typed, location-aware access to the merged YAML tree.
class Reader {
public:
    Reader(YAML::Node root, std::string source, std::set<std::string> overridden)
        : root_(std::move(root)), source_(std::move(source)), overridden_(std::move(overridden)) {}

    YAML::Node lookup(const std::string& key) const {
        YAML::Node cur = root_;
        for (const std::string& part : split_path(key)) {
            if (!cur.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
            const YAML::Node& view = cur;
            YAML::Node next = view[part];
            if (!next.IsDefined()) return next;
            cur.reset(next);
        }
        return cur;
    }

    bool has(const std::string& key) const {
        const YAML::Node n = lookup(key);
        return n.IsDefined() && !n.IsNull();
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        throw ConfigError(where(key) + ": " + key + ": " + message);
    }

    std::string where(const std::string& key) const {
        if (overridden_.count(key)) return "override --" + key;
        const YAML::Node n = lookup(key);
        if (n.IsDefined() && n.Mark().line >= 0) return source_ + ":" + std::to_string(n.Mark().line + 1);
        return source_;
    }

    template <class T>
    T get(const std::string& key, T fallback) const {
        if (!has(key)) return fallback;
        return convert<T>(key, lookup(key));
    }

    // Scalar or sequence, returned as a list.
    template <class T>
    std::vector<T> list(const std::string& key, std::vector<T> fallback) const {
        if (!has(key)) return fallback;
        const YAML::Node n = lookup(key);
        std::vector<T> out;
        if (n.IsSequence()) {
            for (const YAML::Node& item : n) out.push_back(convert<T>(key, item));
        } else {
            out.push_back(convert<T>(key, n));
        }
        if (out.empty()) fail(key, "list must not be empty");
        return out;
    }

    // Every key in the tree must be one of `allowed` (dotted leaf paths).
    void reject_unknown(const std::set<std::string>& allowed) const { walk(root_, "", allowed); }

private:
    template <class T>
    T convert(const std::string& key, const YAML::Node& n) const {
        try {
            if (!n.IsScalar()) fail(key, "expected a scalar value");
            return n.as<T>();
        } catch (const YAML::BadConversion&) {
            if constexpr (std::is_same_v<T, bool>)
                fail(key, "expected true or false, got '" + n.Scalar() + "'");
            else if constexpr (std::is_integral_v<T>)
                fail(key, "expected a non-negative integer, got '" + n.Scalar() + "'");
            else if constexpr (std::is_floating_point_v<T>)
                fail(key, "expected a number, got '" + n.Scalar() + "'");
            else
                fail(key, "unreadable value");
        }
    }

    void walk(const YAML::Node& node, const std::string& prefix, const std::set<std::string>& allowed) const {
        for (const auto& kv : node) {
            const std::string key = prefix.empty() ? kv.first.as<std::string>() : prefix + "." + kv.first.as<std::string>();
            if (allowed.count(key)) continue;
            if (kv.second.IsMap()) {
                bool is_prefix = false;
                for (const std::string& a : allowed) is_prefix |= a.rfind(key + ".", 0) == 0;
                if (is_prefix) {
                    walk(kv.second, key, allowed);
                    continue;
                }
            }
            const std::string loc = overridden_.count(key) ? "override --" + key
                                                           : source_ + ":" + std::to_string(kv.first.Mark().line + 1);
            throw ConfigError(loc + ": unknown key '" + key + "'");
        }
    }

    YAML::Node root_;
    std::string source_;
    std::set<std::string> overridden_;
};

const std::set<std::string> learner_keys = {"alpha", "epsilon0", "decay", "epsilon_min", "q_init"};

std::set<std::string> allowed_keys(Command command) {
    std::set<std::string> keys = {"experiment", "genotype.length", "genotype.variants", "threads", "output.dir",
                                  "output.svg"};
    auto add_learner = [&](const std::string& prefix) {
        for (const std::string& k : learner_keys) keys.insert(prefix + k);
    };
    if (command == Command::sandbox) {
        for (const char* k : {"seed", "initial_genotype", "mutation.mu", "sandbox.initial_health",
                              "sandbox.food_per_step", "sandbox.steps", "policy.kind", "policy.probability",
                              "policy.threshold", "policy.reward"})
            keys.insert(k);
        add_learner("policy.learner.");
        return keys;
    }
    for (const char* k : {"seeds", "game.cost", "inclusive", "steps_max", "window"}) keys.insert(k);
    add_learner("learner.");
    if (command == Command::discrimination) {
        keys.insert("game.c_over_b");
        keys.insert("self_play");
    } else {
        for (const char* k : {"game.b_over_c", "network.community_size", "network.mean_degree", "network.eta",
                              "network.p_in", "network.p_out", "network.interaction"})
            keys.insert(k);
    }
    return keys;
}

LearnerConfig read_learner(const Reader& r, const std::string& prefix, LearnerConfig l, std::optional<double>* decay) {
    l.alpha = r.get(prefix + "alpha", l.alpha);
    if (!(l.alpha > 0.0 && l.alpha <= 1.0)) r.fail(prefix + "alpha", "must lie in (0, 1]");
    l.epsilon0 = r.get(prefix + "epsilon0", l.epsilon0);
    if (!(l.epsilon0 >= 0.0 && l.epsilon0 <= 1.0)) r.fail(prefix + "epsilon0", "must lie in [0, 1]");
    l.epsilon_min = r.get(prefix + "epsilon_min", l.epsilon_min);
    if (!(l.epsilon_min >= 0.0 && l.epsilon_min <= l.epsilon0)) r.fail(prefix + "epsilon_min", "must lie in [0, epsilon0]");
    l.q_init = r.get(prefix + "q_init", l.q_init);
    const std::string decay_key = prefix + "decay";
    if (r.has(decay_key) && r.lookup(decay_key).Scalar() != "auto") {
        const double d = r.get(decay_key, 1.0);
        if (!(d > 0.0 && d <= 1.0)) r.fail(decay_key, "must lie in (0, 1] or be 'auto'");
        if (decay)
            *decay = d;
        else
            l.decay = d;
    }
    return l;
}

nlohmann::json learner_json(const LearnerConfig& l) {
    return {{"alpha", l.alpha}, {"epsilon0", l.epsilon0}, {"decay", l.decay}, {"epsilon_min", l.epsilon_min},
            {"q_init", l.q_init}};
}

std::string canonical_experiment(const ExperimentConfig& c) {
    nlohmann::json j;
    j["experiment"] = to_string(c.kind);
    j["genotype"] = {{"length", c.space.loci}, {"variants", c.space.variants}};
    j["game"]["cost"] = c.cost;
    j["inclusive"] = c.inclusive;
    j["learner"] = learner_json(resolve_learner(c));
    j["steps_max"] = c.steps_max;
    j["window"] = c.window;
    j["seeds"] = c.seeds;
    if (c.kind == ExperimentKind::discrimination) {
        j["game"]["c_over_b"] = c.c_over_b;
        j["self_play"] = c.self_play;
    } else {
        j["game"]["b_over_c"] = c.b_over_c;
        j["network"] = {{"community_size", c.community_size},
                        {"mean_degree", c.mean_degree},
                        {"eta", c.etas},
                        {"interaction", to_string(c.mode)}};
        if (c.probs_override) {
            j["network"]["p_in"] = c.probs_override->p_in;
            j["network"]["p_out"] = c.probs_override->p_out;
        }
    }
    return j.dump();
}

std::string reward_name(RewardKind k) {
    switch (k) {
        case RewardKind::longevity: return "longevity";
        case RewardKind::replication: return "replication";
        case RewardKind::combined: break;
    }
    return "combined";
}

std::string canonical_sandbox(const SandboxRun& s) {
    nlohmann::json j;
    j["experiment"] = "sandbox";
    j["genotype"] = {{"length", s.sandbox.space.loci}, {"variants", s.sandbox.space.variants}};
    j["initial_genotype"] = s.sandbox.initial.str();
    j["mutation"] = {{"mu", s.sandbox.mutation.mu}};
    j["sandbox"] = {{"initial_health", s.sandbox.initial_health},
                    {"food_per_step", s.sandbox.food_per_step},
                    {"steps", s.sandbox.steps}};
    j["policy"] = {{"kind", s.policy.kind},
                   {"probability", s.policy.probability},
                   {"threshold", s.policy.threshold},
                   {"reward", reward_name(s.policy.reward)},
                   {"learner", learner_json(s.policy.learner)}};
    j["seed"] = s.seed;
    return j.dump();
}

GenotypeSpace read_space(const Reader& r, GenotypeSpace fallback) {
    const auto loci = r.get<std::size_t>("genotype.length", fallback.loci);
    if (loci < 1) r.fail("genotype.length", "must be at least 1");
    const auto variants = r.get<Gene>("genotype.variants", fallback.variants);
    if (variants < 2) r.fail("genotype.variants", "must be at least 2");
    return GenotypeSpace(loci, variants);
}

ExperimentConfig read_experiment(const Reader& r, Command command) {
    ExperimentConfig c = command == Command::discrimination ? ExperimentConfig::discrimination_defaults()
                                                            : ExperimentConfig::dispersal_defaults();
    c.space = read_space(r, c.space);
    if (c.space.cardinality() > max_enumerated_genotypes)
        r.fail("genotype.length", "genotype space exceeds 2^20 genotypes");
    c.cost = r.get("game.cost", c.cost);
    if (!(c.cost > 0.0)) r.fail("game.cost", "must be positive");
    c.seeds = r.list<std::uint64_t>("seeds", c.seeds);
    c.inclusive = r.list<bool>("inclusive", c.inclusive);
    c.learner = read_learner(r, "learner.", c.learner, &c.decay);
    c.steps_max = r.get<std::uint64_t>("steps_max", c.steps_max);
    c.window = r.get<std::uint64_t>("window", c.window);
    if (c.window == 0) r.fail("window", "must be positive");
    if (c.steps_max <= c.window) r.fail("steps_max", "must exceed window (" + std::to_string(c.window) + ")");

    if (command == Command::discrimination) {
        c.c_over_b = r.list<double>("game.c_over_b", c.c_over_b);
        for (double v : c.c_over_b)
            if (!(v > 0.0 && v < 1.0)) r.fail("game.c_over_b", "values must lie in (0, 1)");
        c.self_play = r.get("self_play", c.self_play);
        if (c.inclusive.size() != 1) r.fail("inclusive", "discrimination takes a single true/false value");
        return c;
    }

    c.b_over_c = r.list<double>("game.b_over_c", c.b_over_c);
    for (double v : c.b_over_c)
        if (!(v > 1.0)) r.fail("game.b_over_c", "values must exceed 1");
    c.community_size = r.get<std::size_t>("network.community_size", c.community_size);
    if (c.community_size < 2) r.fail("network.community_size", "must be at least 2");
    c.mean_degree = r.get("network.mean_degree", c.mean_degree);
    if (!(c.mean_degree > 0.0)) r.fail("network.mean_degree", "must be positive");
    c.etas = r.list<double>("network.eta", c.etas);
    const std::string mode = r.get<std::string>("network.interaction", to_string(c.mode));
    if (mode == "all_neighbors")
        c.mode = InteractionMode::all_neighbors;
    else if (mode == "sampled_edge")
        c.mode = InteractionMode::sampled_edge;
    else
        r.fail("network.interaction", "must be all_neighbors or sampled_edge");
    if (r.has("network.p_in") != r.has("network.p_out"))
        r.fail(r.has("network.p_in") ? "network.p_in" : "network.p_out", "p_in and p_out must be given together");
    if (r.has("network.p_in")) {
        const PartitionProbs probs{r.get("network.p_in", 0.0), r.get("network.p_out", 0.0)};
        if (!(probs.p_in >= 0.0 && probs.p_in <= 1.0)) r.fail("network.p_in", "must lie in [0, 1]");
        if (!(probs.p_out >= 0.0 && probs.p_out <= 1.0)) r.fail("network.p_out", "must lie in [0, 1]");
        c.probs_override = probs;
    } else {
        for (double eta : c.etas) {
            if (!(eta > 0.0 && eta <= 1.0)) r.fail("network.eta", "values must lie in (0, 1]");
            PartitionSpec spec{c.community_size, static_cast<std::size_t>(c.space.cardinality()), c.mean_degree, eta};
            try {
                derive_partition_probs(spec);
            } catch (const InfeasiblePartition& e) {
                r.fail("network.eta", e.what());
            }
        }
    }
    return c;
}

SandboxRun read_sandbox(const Reader& r) {
    SandboxRun s;
    s.sandbox.space = read_space(r, s.sandbox.space);
    s.seed = r.get<std::uint64_t>("seed", s.seed);
    if (r.has("initial_genotype")) {
        try {
            s.sandbox.initial = Genotype::parse(r.get<std::string>("initial_genotype", ""));
        } catch (const std::invalid_argument& e) {
            r.fail("initial_genotype", e.what());
        }
    } else {
        s.sandbox.initial = Genotype(std::vector<Gene>(s.sandbox.space.loci, 0));
    }
    if (!s.sandbox.space.contains(s.sandbox.initial))
        r.fail("initial_genotype", "does not belong to the configured genotype space");
    const double mu = r.get("mutation.mu", 0.0);
    if (!(mu >= 0.0 && mu <= 1.0)) r.fail("mutation.mu", "mutation probability must lie in [0, 1]");
    s.sandbox.mutation = MutationSpec(mu);
    s.sandbox.initial_health = r.get("sandbox.initial_health", s.sandbox.initial_health);
    if (!(s.sandbox.initial_health > 0.0)) r.fail("sandbox.initial_health", "must be positive");
    s.sandbox.food_per_step = r.get<std::uint64_t>("sandbox.food_per_step", s.sandbox.food_per_step);
    s.sandbox.steps = r.get<std::uint64_t>("sandbox.steps", s.sandbox.steps);

    s.policy.kind = r.get<std::string>("policy.kind", s.policy.kind);
    static const std::set<std::string> kinds = {"idle", "always", "random", "threshold", "qlearning"};
    if (!kinds.count(s.policy.kind)) r.fail("policy.kind", "must be one of idle, always, random, threshold, qlearning");
    s.policy.probability = r.get("policy.probability", s.policy.probability);
    if (!(s.policy.probability >= 0.0 && s.policy.probability <= 1.0))
        r.fail("policy.probability", "must lie in [0, 1]");
    s.policy.threshold = r.get("policy.threshold", s.policy.threshold);
    const std::string reward = r.get<std::string>("policy.reward", reward_name(s.policy.reward));
    if (reward == "longevity")
        s.policy.reward = RewardKind::longevity;
    else if (reward == "replication")
        s.policy.reward = RewardKind::replication;
    else if (reward == "combined")
        s.policy.reward = RewardKind::combined;
    else
        r.fail("policy.reward", "must be longevity, replication or combined");
    s.policy.learner = read_learner(r, "policy.learner.", s.policy.learner, nullptr);
    return s;
}

}  // namespace

LoadedConfig load_config(Command command, const std::optional<std::filesystem::path>& file,
                         const std::vector<Override>& overrides) {
    YAML::Node root(YAML::NodeType::Map);
    std::string source = "<defaults>";
    if (file) {
        source = file->string();
        if (!std::filesystem::is_regular_file(*file)) throw ConfigError(source + ": config file not found");
        try {
            root = YAML::LoadFile(file->string());
        } catch (const YAML::Exception& e) {
            throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
        }
        if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
        if (!root.IsMap()) throw ConfigError(source + ":1: top level must be a mapping");
    }

    std::set<std::string> overridden;
    for (const Override& o : overrides) {
        std::string text = o.value;
        if (text.find(',') != std::string::npos && text.front() != '[') text = "[" + text + "]";
        YAML::Node value;
        try {
            value = YAML::Load(text);
        } catch (const YAML::Exception& e) {
            throw ConfigError("override --" + o.key + ": " + e.msg);
        }
        assign_path(root, split_path(o.key), 0, value);
        overridden.insert(o.key);
    }

    const Reader reader(root, source, overridden);
    reader.reject_unknown(allowed_keys(command));
    if (reader.has("experiment") && reader.get<std::string>("experiment", "") != to_string(command))
        reader.fail("experiment", "config is for '" + reader.get<std::string>("experiment", "") +
                                      "', not '" + to_string(command) + "'");

    LoadedConfig loaded;
    loaded.command = command;
    if (command == Command::sandbox) {
        loaded.sandbox = read_sandbox(reader);
        loaded.canonical = canonical_sandbox(loaded.sandbox);
    } else {
        loaded.experiment = read_experiment(reader, command);
        loaded.canonical = canonical_experiment(loaded.experiment);
        try {
            (void)expand_tasks(loaded.experiment);
        } catch (const std::exception& e) {
            throw ConfigError(source + ": " + e.what());
        }
    }
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const auto threads = reader.get<std::size_t>("threads", 0);
    loaded.threads = threads == 0 ? hw : threads;
    loaded.output.dir = reader.has("output.dir") ? std::filesystem::path(reader.get<std::string>("output.dir", ""))
                                                 : default_output_dir(command);
    loaded.output.svg = reader.get("output.svg", true);
    return loaded;
}

}  // namespace kinrl::cli

namespace kinrl::cli {

Command detect_command(const std::filesystem::path& file) {
    const std::string source = file.string();
    if (!std::filesystem::is_regular_file(file)) throw ConfigError(source + ": config file not found");
    YAML::Node root;
    try {
        root = YAML::LoadFile(source);
    } catch (const YAML::Exception& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    const YAML::Node kind = root.IsMap() ? root["experiment"] : YAML::Node();
    if (!kind.IsDefined() || !kind.IsScalar())
        throw ConfigError(source + ": missing 'experiment' key (discrimination, dispersal or sandbox)");
    const std::string name = kind.Scalar();
    if (name == "discrimination") return Command::discrimination;
    if (name == "dispersal") return Command::dispersal;
    if (name == "sandbox") return Command::sandbox;
    throw ConfigError(source + ":" + std::to_string(kind.Mark().line + 1) + ": experiment: unknown experiment '" +
                      name + "'");
}

}  // namespace kinrl::cli
