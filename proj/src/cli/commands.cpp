#include "kinrl/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "kinrl/format.hpp"

namespace kinrl::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_discrimination_csv(std::ostream& out, std::span<const AggregateRow> rows) {
    out << "c_over_b,h,coop_freq_mean,coop_freq_se,n_seeds\n";
    for (const AggregateRow& r : rows)
        out << format_number(r.key.at(0)) << ',' << format_number(r.key.at(1)) << ',' << format_number(r.mean) << ','
            << format_number(r.std_error) << ',' << r.seeds << '\n';
}

void write_dispersal_csv(std::ostream& out, std::span<const AggregateRow> rows) {
    out << "eta,b_over_c,inclusive,coop_prop_mean,coop_prop_se,n_seeds\n";
    for (const AggregateRow& r : rows)
        out << format_number(r.key.at(0)) << ',' << format_number(r.key.at(1)) << ','
            << (r.key.at(2) != 0.0 ? 1 : 0) << ',' << format_number(r.mean) << ',' << format_number(r.std_error) << ','
            << r.seeds << '\n';
}

std::string run_metadata_json(const LoadedConfig& config, std::span<const RunResult> results) {
    nlohmann::json runs = nlohmann::json::array();
    std::size_t converged = 0;
    for (const RunResult& r : results) {
        nlohmann::json run{{"seed", r.seed},
                           {"ratio", r.point.ratio},
                           {"inclusive", r.point.inclusive},
                           {"steps_run", r.steps_run},
                           {"converged_at", r.converged_at ? nlohmann::json(*r.converged_at) : nlohmann::json()},
                           {"cooperator_proportion", r.cooperator_proportion}};
        if (r.kind == ExperimentKind::dispersal) {
            run["eta"] = r.point.eta;
            run["mean_degree"] = r.degree.mean_degree;
            run["min_degree"] = r.degree.min_degree;
            run["isolated"] = r.degree.isolated_count;
        }
        converged += r.converged_at.has_value();
        runs.push_back(std::move(run));
    }
    nlohmann::json meta{{"experiment", to_string(config.command)},
                        {"config", nlohmann::json::parse(config.canonical)},
                        {"runs_total", results.size()},
                        {"runs_converged", converged},
                        {"runs", std::move(runs)}};
    return meta.dump(2) + "\n";
}

void write_file_atomically(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

// Y axis fixed to [0, 1]; markers are dashed verticals in series colour.
std::string line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<Series>& series, const std::vector<std::pair<std::size_t, double>>& markers) {
    constexpr double width = 640, height = 420, left = 60, right = 170, top = 40, bottom = 50;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    double xmin = 0, xmax = 1;
    bool first = true;
    for (const Series& s : series)
        for (const auto& [x, y] : s.points) {
            xmin = first ? x : std::min(xmin, x);
            xmax = first ? x : std::max(xmax, x);
            first = false;
        }
    if (xmax <= xmin) xmax = xmin + 1;
    const double pw = width - left - right, ph = height - top - bottom;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return top + (1.0 - y) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
        << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double y = i / 4.0;
        svg << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << sy(y) << "\" y2=\"" << sy(y)
            << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">" << format_fixed(y, 2)
            << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double x = xmin + (xmax - xmin) * i / 5.0;
        svg << "<text x=\"" << sx(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
            << format_fixed(x, 2) << "</text>\n";
    }
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
        << escape_xml(xlabel) << "</text>\n";
    svg << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape_xml(ylabel) << "</text>\n";
    for (const auto& [idx, x] : markers) {
        if (x < xmin || x > xmax) continue;
        svg << "<line x1=\"" << sx(x) << "\" x2=\"" << sx(x) << "\" y1=\"" << top << "\" y2=\"" << top + ph
            << "\" stroke=\"" << palette[idx % 7] << "\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* colour = palette[i % 7];
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : series[i].points) svg << sx(x) << ',' << sy(y) << ' ';
        svg << "\"/>\n";
        for (const auto& [x, y] : series[i].points)
            svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
        const double ly = top + 10 + 18.0 * static_cast<double>(i);
        svg << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 32 << "\" y1=\"" << ly << "\" y2=\"" << ly
            << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape_xml(series[i].label)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, const std::string& contents) {
        write_file_atomically(dir_ / name, contents);
        files_.push_back({name, contents.size(), fnv1a64(contents)});
    }

    void write_manifest(const LoadedConfig& config, const std::vector<std::uint64_t>& seeds,
                        const std::string& started) const {
        nlohmann::json outputs = nlohmann::json::array();
        for (const File& f : files_)
            outputs.push_back({{"path", f.name}, {"bytes", f.bytes}, {"fnv1a64", hex64(f.hash)}});
        const nlohmann::json manifest{{"tool", "kinrl"},
                                      {"version", tool_version},
                                      {"command", to_string(config.command)},
                                      {"config_hash", hex64(fnv1a64(config.canonical))},
                                      {"config", nlohmann::json::parse(config.canonical)},
                                      {"seeds", seeds},
                                      {"threads", config.threads},
                                      {"started_at", started},
                                      {"finished_at", utc_now()},
                                      {"outputs", outputs}};
        write_file_atomically(dir_ / "manifest.json", manifest.dump(2) + "\n");
    }

    const fs::path& dir() const { return dir_; }

private:
    struct File {
        std::string name;
        std::size_t bytes;
        std::uint64_t hash;
    };
    fs::path dir_;
    std::vector<File> files_;
};

std::vector<RunResult> run_sweep(const LoadedConfig& config, std::ostream& log) {
    const std::vector<SweepTask> tasks = expand_tasks(config.experiment);
    log << to_string(config.command) << ": " << tasks.size() << " runs on " << config.threads << " thread(s)\n";
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<RunResult> results = run_tasks(tasks, config.threads);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto converged =
        std::count_if(results.begin(), results.end(), [](const RunResult& r) { return r.converged_at.has_value(); });
    log << "finished in " << format_fixed(secs, 1) << " s, " << converged << "/" << results.size() << " converged\n";
    return results;
}

int run_discrimination_command(const LoadedConfig& config, std::ostream& log, OutputSet& out) {
    const std::vector<RunResult> results = run_sweep(config, log);
    const std::vector<AggregateRow> rows = aggregate(results, Binning::by_similarity);
    std::ostringstream csv;
    write_discrimination_csv(csv, rows);
    out.add("discrimination.csv", csv.str());
    out.add("discrimination.meta.json", run_metadata_json(config, results));
    if (config.output.svg) out.add("discrimination.svg", discrimination_svg(rows));
    return 0;
}

int run_dispersal_command(const LoadedConfig& config, std::ostream& log, OutputSet& out) {
    const std::vector<RunResult> results = run_sweep(config, log);
    const std::vector<AggregateRow> rows = aggregate(results, Binning::by_parameter);
    std::ostringstream csv;
    write_dispersal_csv(csv, rows);
    out.add("dispersal.csv", csv.str());
    out.add("dispersal.meta.json", run_metadata_json(config, results));
    if (config.output.svg) out.add("dispersal.svg", dispersal_svg(rows));
    return 0;
}

int run_sandbox_command(const LoadedConfig& config, std::ostream& log, OutputSet& out) {
    const SandboxRun& run = config.sandbox;
    std::unique_ptr<ReproductionPolicy> policy = make_policy(run.policy);
    Rng rng = make_stream(run.seed, Stream::sandbox);
    const PopulationTrace trace = run_sandbox(run.sandbox, *policy, rng);
    const std::vector<RewardRow> rows = compute_rewards(trace);

    std::ostringstream trace_csv, rewards_csv;
    write_trace_csv(trace_csv, trace);
    write_rewards_csv(rewards_csv, rows);
    out.add("trace.csv", trace_csv.str());
    out.add("rewards.csv", rewards_csv.str());

    const IdentityReport report = check_reward_identities(trace, rows);
    std::size_t peak = 0;
    for (const TraceStep& s : trace.steps) peak = std::max(peak, s.state.size());
    const nlohmann::json meta{
        {"experiment", "sandbox"},
        {"config", nlohmann::json::parse(config.canonical)},
        {"steps_simulated", trace.length()},
        {"extinct_at", trace.extinct_at ? nlohmann::json(*trace.extinct_at) : nlohmann::json()},
        {"final_population", trace.steps.empty() ? 0 : trace.steps.back().state.size()},
        {"peak_population", peak},
        {"identity_check",
         {{"rows", report.checked},
          {"max_replication_gap", report.max_replication_gap},
          {"max_telescoping_gap", report.max_telescoping_gap},
          {"longevity_dominated", report.longevity_dominated},
          {"passed", report.passed()}}}};
    out.add("sandbox.meta.json", meta.dump(2) + "\n");

    log << "sandbox: " << trace.length() << " steps, peak population " << peak;
    if (trace.extinct_at) log << ", extinct at t=" << *trace.extinct_at;
    log << "\n";
    log << "identity check: " << (report.passed() ? "PASS" : "FAIL") << " (" << report.checked
        << " rows, max replication gap " << format_number(report.max_replication_gap) << ", max telescoping gap "
        << format_number(report.max_telescoping_gap) << ")\n";
    return report.passed() ? 0 : 1;
}

}  // namespace

std::string discrimination_svg(std::span<const AggregateRow> rows) {
    std::map<double, Series> by_ratio;
    for (const AggregateRow& r : rows) {
        Series& s = by_ratio[r.key.at(0)];
        s.label = "c/b = " + format_number(r.key.at(0));
        s.points.emplace_back(r.key.at(1), r.mean);
    }
    std::vector<Series> series;
    std::vector<std::pair<std::size_t, double>> markers;
    for (auto& [ratio, s] : by_ratio) {
        markers.emplace_back(series.size(), ratio);
        series.push_back(std::move(s));
    }
    return line_chart("Cooperation by genetic similarity", "similarity h", "cooperation frequency", series, markers);
}

std::string dispersal_svg(std::span<const AggregateRow> rows) {
    std::map<std::pair<bool, double>, Series> grouped;
    for (const AggregateRow& r : rows) {
        const bool inclusive = r.key.at(2) != 0.0;
        Series& s = grouped[{!inclusive, r.key.at(0)}];
        s.label = (inclusive ? "inclusive" : "baseline") + std::string(", eta = ") + format_number(r.key.at(0));
        s.points.emplace_back(r.key.at(1), r.mean);
    }
    std::vector<Series> series;
    for (auto& [key, s] : grouped) series.push_back(std::move(s));
    return line_chart("Cooperators on community networks", "b/c", "cooperator proportion", series, {});
}

int run_command(const LoadedConfig& config, std::ostream& log) {
    const std::string started = utc_now();
    OutputSet out(config.output.dir);
    int code = 0;
    std::vector<std::uint64_t> seeds;
    switch (config.command) {
        case Command::discrimination:
            code = run_discrimination_command(config, log, out);
            seeds = config.experiment.seeds;
            break;
        case Command::dispersal:
            code = run_dispersal_command(config, log, out);
            seeds = config.experiment.seeds;
            break;
        case Command::sandbox:
            code = run_sandbox_command(config, log, out);
            seeds = {config.sandbox.seed};
            break;
    }
    out.write_manifest(config, seeds, started);
    log << "outputs written to " << out.dir().string() << "\n";
    return code;
}

}  // namespace kinrl::cli
