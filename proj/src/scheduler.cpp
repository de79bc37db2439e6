#include "sdtc/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

namespace sdtc {

void IntersectionConfig::validate() const {
    const auto n = static_cast<std::size_t>(phase_count);
    if (phase_count < 1) throw ConfigError("IntersectionConfig.phase_count must be >= 1");
    if (min_switch.size() != n * n)
        throw ConfigError("IntersectionConfig.min_switch must be a phase_count^2 matrix");
    if (startup_lost.size() != n || max_green.size() != n || min_green.size() != n)
        throw ConfigError("IntersectionConfig per-phase vectors must have phase_count entries");
    for (int s = 0; s < phase_count; ++s) {
        if (min_switch_at(s, s) != 0.0)
            throw ConfigError("IntersectionConfig.min_switch diagonal must be zero");
        for (int i = 0; i < phase_count; ++i)
            if (min_switch_at(s, i) < 0.0)
                throw ConfigError("IntersectionConfig.min_switch entries must be >= 0");
    }
    for (int p = 0; p < phase_count; ++p) {
        if (startup_lost[static_cast<std::size_t>(p)] < 0.0)
            throw ConfigError("IntersectionConfig.startup_lost entries must be >= 0");
        if (max_green[static_cast<std::size_t>(p)] <= 0.0)
            throw ConfigError("IntersectionConfig.max_green entries must be > 0");
        if (min_green[static_cast<std::size_t>(p)] < 0.0)
            throw ConfigError("IntersectionConfig.min_green entries must be >= 0");
        if (min_green[static_cast<std::size_t>(p)] > max_green[static_cast<std::size_t>(p)])
            throw ConfigError("IntersectionConfig.min_green must not exceed max_green");
    }
}

IntersectionConfig IntersectionConfig::uniform(int phases, double switch_s, double slt_s,
                                               double max_green_s, double min_green_s) {
    IntersectionConfig cfg;
    cfg.phase_count = phases;
    const auto n = static_cast<std::size_t>(phases);
    cfg.min_switch.assign(n * n, switch_s);
    for (std::size_t s = 0; s < n; ++s) cfg.min_switch[s * n + s] = 0.0;
    cfg.startup_lost.assign(n, slt_s);
    cfg.max_green.assign(n, max_green_s);
    cfg.min_green.assign(n, min_green_s);
    return cfg;
}

std::vector<int> ControlFlow::phase_sequence() const {
    std::vector<int> s;
    s.reserve(entries.size());
    for (const auto& e : entries) s.push_back(e.phase);
    return s;
}

StateAdvance advance_state(const ScheduleState& prev, int next_phase, const Cluster& c,
                           const IntersectionConfig& cfg) {
    if (next_phase < 0 || next_phase >= cfg.phase_count)
        throw ConfigError("advance_state: next_phase outside [0, phase_count)");
    if (c.count < 1) throw ConfigError("advance_state: cluster count must be >= 1");
    if (c.dep < c.arr) throw ConfigError("advance_state: cluster dep precedes arr");

    const int s = prev.phase;
    const double pst = prev.t + cfg.min_switch_at(s, next_phase);
    double ast = std::max(c.arr, pst);
    if (s != next_phase && pst > c.arr)
        ast += cfg.startup_lost[static_cast<std::size_t>(next_phase)];
    const double t = ast + (c.dep - c.arr);

    ScheduleState st;
    st.phase = next_phase;
    st.pd = (s != next_phase) ? (t - pst) : prev.pd + (t - pst);
    st.t = t;
    st.d = prev.d + c.count * (ast - c.arr);
    return {st, pst, ast};
}

StateAdvance advance_with_min_green(const ScheduleState& prev, int next_phase,
                                    const Cluster& c, const IntersectionConfig& cfg) {
    ScheduleState adj = prev;
    if (next_phase != prev.phase) {
        const double need = cfg.min_green[static_cast<std::size_t>(prev.phase)];
        if (adj.pd < need) {
            adj.t += need - adj.pd;
            adj.pd = need;
        }
    }
    return advance_state(adj, next_phase, c, cfg);
}

double cumulative_delay(const ControlFlow& flow) {
    double d = 0.0;
    for (const auto& e : flow.entries) d += e.delay();
    return d;
}

namespace {

struct Job {
    Cluster c;
    RoadId road;
};

// Merge the phase's road sequences into one service order, keeping each road's
// internal order (arrivals are increasing within a road, so sorting by arrival
// preserves it). Ties resolve deterministically.
std::vector<Job> merge_phase_jobs(const std::vector<RoadClusterSequence>& roads) {
    std::vector<Job> jobs;
    for (const auto& seq : roads)
        for (const auto& c : seq.clusters) jobs.push_back(Job{c, seq.road});
    std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
        if (a.c.arr != b.c.arr) return a.c.arr < b.c.arr;
        if (a.c.dep != b.c.dep) return a.c.dep < b.c.dep;
        return a.road < b.road;
    });
    return jobs;
}

struct DpEntry {
    double pd = 0.0;
    double t = 0.0;
    double d = 0.0;
    double run_svc = 0.0;  // service accumulated by the current green run
    std::int32_t path = -1;
};

struct PathNode {
    std::int32_t parent;
    std::int8_t phase;
};

std::vector<std::int8_t> reconstruct(const std::vector<PathNode>& arena, std::int32_t idx) {
    std::vector<std::int8_t> seq;
    for (std::int32_t i = idx; i >= 0; i = arena[static_cast<std::size_t>(i)].parent)
        seq.push_back(arena[static_cast<std::size_t>(i)].phase);
    std::reverse(seq.begin(), seq.end());
    return seq;
}

bool lex_le(const std::vector<std::int8_t>& a, const std::vector<std::int8_t>& b) {
    return !std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

// Exact Pareto dominance on (t, d, pd, run_svc); full ties keep the
// lexicographically smaller phase sequence.
bool dominates(const DpEntry& a, const DpEntry& b, const std::vector<PathNode>& arena) {
    if (a.t > b.t || a.d > b.d || a.pd < b.pd || a.run_svc > b.run_svc) return false;
    if (a.t < b.t || a.d < b.d || a.pd > b.pd || a.run_svc < b.run_svc) return true;
    return lex_le(reconstruct(arena, a.path), reconstruct(arena, b.path));
}

constexpr int kMaxDpPhases = 7;

std::uint64_t pack_key(const std::vector<std::uint8_t>& counts, int phase) {
    std::uint64_t k = static_cast<std::uint64_t>(phase) << 56;
    for (std::size_t p = 0; p < counts.size(); ++p)
        k |= static_cast<std::uint64_t>(counts[p]) << (8 * p);
    return k;
}

}  // namespace

ControlFlow forward_dp(const InputClusterSequence& input, const ScheduleState& initial,
                       const IntersectionConfig& cfg, const DpOptions& opts) {
    cfg.validate();
    const int P = cfg.phase_count;
    if (input.phase_count() != P)
        throw ConfigError("forward_dp: input phase count does not match IntersectionConfig");
    if (P > kMaxDpPhases)
        throw ConfigError("forward_dp: at most 7 phases supported");
    if (initial.phase < 0 || initial.phase >= P)
        throw ConfigError("forward_dp: initial phase outside [0, phase_count)");

    std::vector<std::vector<Job>> jobs(static_cast<std::size_t>(P));
    int total = 0;
    for (int p = 0; p < P; ++p) {
        jobs[static_cast<std::size_t>(p)] =
            merge_phase_jobs(input.by_phase[static_cast<std::size_t>(p)]);
        const auto n = jobs[static_cast<std::size_t>(p)].size();
        if (n > 255) throw ConfigError("forward_dp: more than 255 clusters on one phase");
        total += static_cast<int>(n);
    }

    ControlFlow flow;
    flow.initial = initial;
    flow.final_state = initial;
    if (total == 0) return flow;

    std::vector<PathNode> arena;
    arena.reserve(static_cast<std::size_t>(total) * 64);

    using Frontier = std::vector<DpEntry>;
    // layer maps (consumed-count vector, current phase) -> Pareto frontier
    std::map<std::uint64_t, Frontier> layer;
    std::vector<std::uint8_t> zero(static_cast<std::size_t>(P), 0);
    layer[pack_key(zero, initial.phase)] = {
        DpEntry{initial.pd, initial.t, initial.d, initial.pd, -1}};

    auto insert_entry = [&arena](Frontier& f, const DpEntry& e) {
        for (const auto& old : f)
            if (dominates(old, e, arena)) return;
        f.erase(std::remove_if(f.begin(), f.end(),
                               [&](const DpEntry& old) { return dominates(e, old, arena); }),
                f.end());
        f.push_back(e);
    };

    std::vector<std::uint8_t> counts(static_cast<std::size_t>(P));
    for (int k = 0; k < total; ++k) {
        std::map<std::uint64_t, Frontier> next;
        for (const auto& [key, frontier] : layer) {
            const int s = static_cast<int>(key >> 56);
            for (int p = 0; p < P; ++p)
                counts[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(key >> (8 * p));
            for (int i = 0; i < P; ++i) {
                const auto& phase_jobs = jobs[static_cast<std::size_t>(i)];
                const std::size_t used = counts[static_cast<std::size_t>(i)];
                if (used >= phase_jobs.size()) continue;
                const Job& job = phase_jobs[used];
                const double svc = job.c.service();

                counts[static_cast<std::size_t>(i)] += 1;
                const std::uint64_t nkey = pack_key(counts, i);
                for (const auto& e : frontier) {
                    const ScheduleState prev{s, e.pd, e.t, e.d};
                    const StateAdvance sa = advance_with_min_green(prev, i, job.c, cfg);
                    const double run2 = (i == s) ? e.run_svc + svc : svc;
                    if (opts.cap_max_green && i == s &&
                        run2 > cfg.max_green[static_cast<std::size_t>(i)] + 1e-9) {
                        // Extension only blocked while some other phase's next
                        // cluster would actually wait behind this green.
                        bool waiting = false;
                        for (int j = 0; j < P && !waiting; ++j) {
                            if (j == i) continue;
                            const std::size_t uj = counts[static_cast<std::size_t>(j)];
                            if (uj < jobs[static_cast<std::size_t>(j)].size() &&
                                jobs[static_cast<std::size_t>(j)][uj].c.arr <
                                    sa.state.t - 1e-9)
                                waiting = true;
                        }
                        if (waiting) continue;
                    }
                    arena.push_back(PathNode{e.path, static_cast<std::int8_t>(i)});
                    insert_entry(next[nkey],
                                 DpEntry{sa.state.pd, sa.state.t, sa.state.d, run2,
                                         static_cast<std::int32_t>(arena.size() - 1)});
                }
                counts[static_cast<std::size_t>(i)] -= 1;
            }
        }
        layer = std::move(next);
    }

    // All layer keys now have the full count vector; pick min delay, then the
    // lexicographically smallest phase sequence.
    const DpEntry* best = nullptr;
    std::vector<std::int8_t> best_seq;
    for (const auto& [key, frontier] : layer) {
        for (const auto& e : frontier) {
            if (!best || e.d < best->d) {
                best = &e;
                best_seq = reconstruct(arena, e.path);
            } else if (e.d == best->d) {
                auto seq = reconstruct(arena, e.path);
                if (std::lexicographical_compare(seq.begin(), seq.end(), best_seq.begin(),
                                                 best_seq.end())) {
                    best = &e;
                    best_seq = std::move(seq);
                }
            }
        }
    }
    if (!best) throw SimulationError("forward_dp: no feasible schedule found");

    // Refold the chosen sequence to annotate pst/ast/finish per cluster.
    std::vector<std::size_t> cursor(static_cast<std::size_t>(P), 0);
    ScheduleState st = initial;
    for (const std::int8_t ph : best_seq) {
        const Job& job = jobs[static_cast<std::size_t>(ph)][cursor[static_cast<std::size_t>(ph)]++];
        const StateAdvance sa = advance_with_min_green(st, ph, job.c, cfg);
        st = sa.state;
        flow.entries.push_back(ScheduledCluster{ph, job.road, job.c, sa.pst, sa.ast, st.t});
    }
    flow.final_state = st;
    return flow;
}

namespace {

struct RunView {
    std::size_t first = 0;
    std::size_t last = 0;  // inclusive
    int phase = 0;
    double service = 0.0;
    double finish = 0.0;
};

std::vector<RunView> phase_runs(const ControlFlow& flow) {
    std::vector<RunView> runs;
    for (std::size_t i = 0; i < flow.entries.size(); ++i) {
        const auto& e = flow.entries[i];
        if (!runs.empty() && runs.back().phase == e.phase) {
            runs.back().last = i;
            runs.back().service += e.cluster.service();
            runs.back().finish = e.finish;
        } else {
            runs.push_back(RunView{i, i, e.phase, e.cluster.service(), e.finish});
        }
    }
    return runs;
}

// A run offends when it needs more green than max_green while a cluster of a
// different phase scheduled later has already arrived (i.e. actually waits).
std::optional<RunView> first_offending_run(const ControlFlow& flow,
                                           const IntersectionConfig& cfg) {
    const auto runs = phase_runs(flow);
    for (const auto& r : runs) {
        double used = r.service;
        if (r.first == 0 && r.phase == flow.initial.phase) used += flow.initial.pd;
        if (used <= cfg.max_green[static_cast<std::size_t>(r.phase)] + 1e-9) continue;
        for (std::size_t i = r.last + 1; i < flow.entries.size(); ++i) {
            const auto& e = flow.entries[i];
            if (e.phase != r.phase && e.cluster.arr < r.finish - 1e-9) return r;
        }
    }
    return std::nullopt;
}

// Split cluster `target` (matched by road + arr) inside `input` after its first
// `keep` vehicles, interpolating member arrivals across [arr, dep].
bool split_cluster(InputClusterSequence& input, int phase, const RoadId& road,
                   const Cluster& target, int keep) {
    auto& roads = input.by_phase[static_cast<std::size_t>(phase)];
    for (auto& seq : roads) {
        if (seq.road != road) continue;
        for (std::size_t k = 0; k < seq.clusters.size(); ++k) {
            Cluster& c = seq.clusters[k];
            if (c.arr != target.arr || c.count != target.count) continue;
            const double per = c.service() / c.count;
            const double cut = c.arr + keep * per;
            Cluster head{keep, c.arr, cut,
                         {c.members.begin(), c.members.begin() + keep}};
            Cluster tail{c.count - keep, cut, c.dep,
                         {c.members.begin() + keep, c.members.end()}};
            seq.clusters[k] = head;
            seq.clusters.insert(seq.clusters.begin() + static_cast<std::ptrdiff_t>(k) + 1,
                                tail);
            return true;
        }
    }
    return false;
}

}  // namespace

ControlFlow enforce_max_green(const ControlFlow& flow, const InputClusterSequence& input,
                              const ScheduleState& initial, const IntersectionConfig& cfg) {
    bool any_oversized = false;
    for (const auto& e : flow.entries)
        if (e.cluster.service() > cfg.max_green[static_cast<std::size_t>(e.phase)] + 1e-9)
            any_oversized = true;
    if (!any_oversized && !first_offending_run(flow, cfg)) return flow;

    InputClusterSequence work = input;
    ControlFlow cur = flow;
    const int guard = 2 * std::max(1, input.total_vehicles());
    for (int iter = 0; iter < guard; ++iter) {
        // A single cluster must never be granted more green than max_green,
        // competitors or not: split it at the vehicle whose cumulative service
        // crosses the cap and re-solve.
        const ScheduledCluster* oversized = nullptr;
        for (const auto& e : cur.entries) {
            if (e.cluster.service() >
                cfg.max_green[static_cast<std::size_t>(e.phase)] + 1e-9) {
                oversized = &e;
                break;
            }
        }
        if (oversized) {
            const double cap0 =
                cfg.max_green[static_cast<std::size_t>(oversized->phase)];
            const double per0 = oversized->cluster.service() / oversized->cluster.count;
            if (per0 > cap0 + 1e-9)
                throw ConfigError(
                    "enforce_max_green: a single vehicle's service time exceeds max_green");
            const int keep0 = std::min(static_cast<int>(std::floor(cap0 / per0 + 1e-9)),
                                       oversized->cluster.count - 1);
            if (!split_cluster(work, oversized->phase, oversized->road,
                               oversized->cluster, keep0))
                throw SimulationError(
                    "enforce_max_green: scheduled cluster missing from input");
            cur = forward_dp(work, initial, cfg, DpOptions{true});
            continue;
        }

        const auto run = first_offending_run(cur, cfg);
        if (!run) return cur;

        const double cap = cfg.max_green[static_cast<std::size_t>(run->phase)];
        double used = 0.0;
        if (run->first == 0 && run->phase == cur.initial.phase) used = cur.initial.pd;
        const ScheduledCluster* straddler = nullptr;
        double budget = cap;
        for (std::size_t i = run->first; i <= run->last; ++i) {
            const auto& e = cur.entries[i];
            const double svc = e.cluster.service();
            if (used + svc > cap + 1e-9) {
                straddler = &e;
                budget = cap - used;
                break;
            }
            used += svc;
        }
        if (!straddler) return cur;  // arithmetic says nothing actually straddles

        const double per = straddler->cluster.service() / straddler->cluster.count;
        if (per > cap + 1e-9)
            throw ConfigError(
                "enforce_max_green: a single vehicle's service time exceeds max_green");

        // Split only when at least one vehicle fits in the remaining budget and
        // the cluster has something to split; otherwise the overflow stems from
        // green already spent (e.g. the live phase's elapsed time) and the
        // capped re-solve below resolves it by switching away instead.
        const int keep = static_cast<int>(std::floor(budget / per + 1e-9));
        if (straddler->cluster.count > 1 && keep >= 1) {
            const int k = std::min(keep, straddler->cluster.count - 1);
            if (!split_cluster(work, straddler->phase, straddler->road, straddler->cluster,
                               k))
                throw SimulationError(
                    "enforce_max_green: scheduled cluster missing from input");
        }

        cur = forward_dp(work, initial, cfg, DpOptions{true});
    }
    throw SimulationError("enforce_max_green: did not converge");
}

ControlFlow reschedule_largest_delay_batch(const ControlFlow& flow,
                                           const InputClusterSequence& input,
                                           const ScheduleState& initial,
                                           const IntersectionConfig& cfg) {
    if (flow.entries.empty()) return flow;

    // Worst cluster by schedule-level delay ast - arr.
    const ScheduledCluster* worst = nullptr;
    double worst_gap = 1e-9;
    for (const auto& e : flow.entries) {
        const double gap = e.ast - e.cluster.arr;
        if (gap > worst_gap) {
            worst_gap = gap;
            worst = &e;
        }
    }
    if (!worst) return flow;  // nothing is delayed

    // Re-express every vehicle arriving inside the batch window [arr, ast] of
    // the worst cluster as a singleton, leaving vehicles outside it grouped.
    const double lo = worst->cluster.arr;
    const double hi = worst->ast;
    InputClusterSequence work = input;
    bool changed = false;
    for (auto& roads : work.by_phase) {
        for (auto& seq : roads) {
            std::vector<Cluster> rebuilt;
            for (const Cluster& c : seq.clusters) {
                const double per = c.service() / c.count;
                auto member_arr = [&](int j) { return c.arr + j * per; };
                auto inside = [&](int j) {
                    const double a = member_arr(j);
                    return a >= lo - 1e-9 && a <= hi + 1e-9;
                };
                std::vector<Cluster> parts;
                int j = 0;
                while (j < c.count) {
                    if (inside(j)) {
                        const double a = member_arr(j);
                        parts.push_back(Cluster{
                            1, a, a + per, {c.members[static_cast<std::size_t>(j)]}});
                        ++j;
                    } else {
                        int e = j;
                        while (e < c.count && !inside(e)) ++e;
                        const double dep = (e == c.count) ? c.dep : member_arr(e);
                        parts.push_back(Cluster{
                            e - j, member_arr(j), dep,
                            {c.members.begin() + j, c.members.begin() + e}});
                        j = e;
                    }
                }
                if (parts.size() > 1) changed = true;
                for (auto& p : parts) rebuilt.push_back(std::move(p));
            }
            seq.clusters = std::move(rebuilt);
        }
    }
    if (!changed) return flow;

    const ControlFlow candidate = forward_dp(work, initial, cfg, DpOptions{true});
    return cumulative_delay(candidate) < cumulative_delay(flow) - 1e-12 ? candidate
                                                                        : flow;
}

}  // namespace sdtc
