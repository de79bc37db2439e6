#include "sdtc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "sdtc/simulator.hpp"

namespace sdtc {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (const double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (const double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& sc, std::uint64_t seed) {
    sc.validate();
    World world(sc, seed);
    world.run();

    std::vector<double> delays;
    for (const auto& e : world.exits())
        if (e.entry_time >= sc.measure_from_s && e.entry_time < sc.measure_to_s)
            delays.push_back(e.delay);

    RunResult r;
    r.scenario = sc.name;
    r.seed = seed;
    r.controller = sc.controller;
    r.demand = sc.demand_tier;
    r.interval = sc.clustering_interval_s;
    r.penetration = sc.penetration;
    r.vehicles = static_cast<int>(delays.size());
    r.throughput = static_cast<int>(world.exits().size());
    r.no_vehicles = delays.empty();
    r.determinism_hash = world.exit_hash();
    r.mean_delay_s = mean_of(delays);
    r.std_delay_s = sample_std(delays);
    return r;
}

std::vector<RunResult> sweep(const ScenarioConfig& base, const SweepAxes& axes,
                             const std::vector<std::uint64_t>& seeds, int max_threads) {
    if (seeds.empty()) throw ConfigError("sweep: at least one seed is required");
    const auto demands =
        axes.demands.empty() ? std::vector<std::string>{base.demand_tier} : axes.demands;
    const auto controllers =
        axes.controllers.empty() ? std::vector<std::string>{base.controller}
                                 : axes.controllers;
    const auto intervals = axes.intervals.empty()
                               ? std::vector<double>{base.clustering_interval_s}
                               : axes.intervals;
    const auto penetrations = axes.penetrations.empty()
                                  ? std::vector<double>{base.penetration}
                                  : axes.penetrations;

    struct Job {
        ScenarioConfig sc;
        std::uint64_t seed = 0;
        std::string cell;
    };
    std::vector<Job> jobs;
    for (const auto& d : demands)
        for (const auto& c : controllers)
            for (const double iv : intervals)
                for (const double p : penetrations)
                    for (const std::uint64_t seed : seeds) {
                        Job j;
                        j.sc = base;
                        j.sc.demand_tier = d;
                        j.sc.controller = c;
                        j.sc.clustering_interval_s = iv;
                        j.sc.penetration = p;
                        j.seed = seed;
                        std::ostringstream cell;
                        cell << "demand=" << d << " controller=" << c << " interval=" << iv
                             << " penetration=" << p << " seed=" << seed;
                        j.cell = cell.str();
                        jobs.push_back(std::move(j));
                    }

    std::vector<RunResult> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::vector<int> error_kind(jobs.size(), 0);  // 1 = config, 2 = simulation
    std::atomic<std::size_t> cursor{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                results[i] = run_scenario(jobs[i].sc, jobs[i].seed);
            } catch (const ConfigError& e) {
                errors[i] = std::string(e.what()) + " [" + jobs[i].cell + "]";
                error_kind[i] = 1;
            } catch (const std::exception& e) {
                errors[i] = std::string(e.what()) + " [" + jobs[i].cell + "]";
                error_kind[i] = 2;
            }
        }
    };
    unsigned n = max_threads > 0 ? static_cast<unsigned>(max_threads)
                                 : std::thread::hardware_concurrency();
    n = std::clamp<unsigned>(n, 1u, static_cast<unsigned>(jobs.size()));
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (errors[i].empty()) continue;
        if (error_kind[i] == 1) throw ConfigError(errors[i]);
        throw SimulationError(errors[i]);
    }
    return results;
}

std::string results_csv(const std::vector<RunResult>& results) {
    std::ostringstream os;
    os << "scenario,seed,controller,demand,interval,penetration,vehicles,mean_delay_s,"
          "std_delay_s\n";
    for (const auto& r : results)
        os << r.scenario << ',' << r.seed << ',' << r.controller << ',' << r.demand << ','
           << fmt("%g", r.interval) << ',' << fmt("%g", r.penetration) << ',' << r.vehicles
           << ',' << fmt("%.4f", r.mean_delay_s) << ',' << fmt("%.4f", r.std_delay_s)
           << '\n';
    return os.str();
}

void write_results_csv(const std::string& path, const std::vector<RunResult>& results) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write results file '" + path + "'");
    out << results_csv(results);
}

std::string results_table(const std::vector<RunResult>& results) {
    struct Cell {
        std::string scenario, controller, demand;
        double interval = 0.0, penetration = 1.0;
        std::vector<double> means;
        double vehicles = 0.0;
    };
    std::vector<Cell> cells;
    for (const auto& r : results) {
        Cell* cell = nullptr;
        for (auto& c : cells)
            if (c.scenario == r.scenario && c.controller == r.controller &&
                c.demand == r.demand && c.interval == r.interval &&
                c.penetration == r.penetration) {
                cell = &c;
                break;
            }
        if (cell == nullptr) {
            cells.push_back({r.scenario, r.controller, r.demand, r.interval, r.penetration,
                             {}, 0.0});
            cell = &cells.back();
        }
        cell->means.push_back(r.mean_delay_s);
        cell->vehicles += r.vehicles;
    }

    std::vector<std::vector<std::string>> rows;
    rows.push_back({"scenario", "controller", "demand", "interval", "penetration", "runs",
                    "vehicles", "mean_delay_s", "std_over_seeds"});
    for (const auto& c : cells) {
        const double n = static_cast<double>(c.means.size());
        rows.push_back({c.scenario, c.controller, c.demand, fmt("%g", c.interval),
                        fmt("%g", c.penetration), std::to_string(c.means.size()),
                        fmt("%.1f", c.vehicles / std::max(n, 1.0)),
                        fmt("%.3f", mean_of(c.means)), fmt("%.3f", sample_std(c.means))});
    }

    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            width[i] = std::max(width[i], row[i].size());
    std::ostringstream os;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const bool numeric = i >= 3;  // right-align the numeric columns
            const std::string pad(width[i] - row[i].size(), ' ');
            if (i) os << "  ";
            os << (numeric ? pad + row[i] : row[i] + pad);
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace sdtc
