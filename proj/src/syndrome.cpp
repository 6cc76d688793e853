#include "cmm/syndrome.hpp"

#include "cmm/common.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace cmm::syndrome {

void SearchConfig::validate() const
{
    require(n_atoms >= 0, "atom count must be non-negative");
    require(n_batch >= 1, "batch size must be at least 1");
    require(n_modes >= 1, "mode count must be at least 1");
    require(p_synd >= 0.0 && p_synd <= 1.0, "p_synd outside [0, 1]");
    require(t_query_s > 0.0, "query time must be positive");
    require(free_space_time_s >= 0.0, "free-space readout time must be non-negative");
}

double expected_queries_per_batch(double n_batch, double p_synd)
{
    require(n_batch > 0.0, "batch size must be positive");
    return 1.0 + n_batch * p_synd * (1.0 + std::log2(n_batch));
}

double total_steps(long n_atoms, int n_batch, int n_modes, double p_synd)
{
    require(n_atoms > 0 && n_batch > 0 && n_modes > 0, "step count needs positive sizes");
    const long per_round = static_cast<long>(n_batch) * n_modes;
    const long rounds = (n_atoms + per_round - 1) / per_round;
    return rounds * expected_queries_per_batch(n_batch, p_synd);
}

int effective_batch(long n_atoms, int n_batch_max, int n_modes)
{
    require(n_batch_max >= 1 && n_modes >= 1, "batch policy needs positive sizes");
    const long per_mode = (n_atoms + n_modes - 1) / n_modes;
    return static_cast<int>(std::max(1L, std::min<long>(n_batch_max, per_mode)));
}

int search_batch(std::vector<int> faults, int batch_size, std::vector<int>* found)
{
    std::vector<int> sink;
    return search_batch(faults, batch_size, found ? *found : sink, [](int, int, bool) {});
}

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform on (0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations so traces are portable.
double open_unit(std::mt19937_64& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

struct Run {
    long total_queries = 0;
    long rounds = 0;
    long batches = 0;
    long sequential_batches = 0;
    std::vector<long> identified;
};

template <typename Record>
Run run_protocol(const SearchConfig& cfg, const std::vector<long>& faults, Record&& record)
{
    Run run;
    if (cfg.n_atoms == 0)
        return run;
    const int batch = effective_batch(cfg.n_atoms, cfg.n_batch, cfg.n_modes);
    run.batches = (cfg.n_atoms + batch - 1) / batch;
    run.sequential_batches = (run.batches + cfg.n_modes - 1) / cfg.n_modes;

    std::vector<long> mode_clock(cfg.n_modes, 0);
    auto next_fault = faults.begin();
    std::vector<int> local;
    std::vector<int> found;
    for (long b = 0; b < run.batches; ++b) {
        const long first = b * batch;
        const int size = static_cast<int>(std::min<long>(batch, cfg.n_atoms - first));
        local.clear();
        while (next_fault != faults.end() && *next_fault < first + size) {
            local.push_back(static_cast<int>(*next_fault - first));
            ++next_fault;
        }
        found.clear();
        const int mode = static_cast<int>(b % cfg.n_modes);
        long& clock = mode_clock[mode];
        run.total_queries += search_batch(local, size, found, [&](int begin, int end, bool positive) {
            record(clock, mode, b, begin, end, positive);
            ++clock;
        });
        for (int f : found)
            run.identified.push_back(first + f);
    }
    run.rounds = *std::max_element(mode_clock.begin(), mode_clock.end());
    std::sort(run.identified.begin(), run.identified.end());
    return run;
}

double batch_model_time(const SearchConfig& cfg, const Run& run)
{
    if (run.batches == 0)
        return 0.0;
    return static_cast<double>(run.total_queries) / run.batches * run.sequential_batches * cfg.t_query_s;
}

} // namespace

std::vector<long> draw_faults(long n_atoms, double p_synd, std::uint64_t seed, std::uint64_t trial)
{
    std::vector<long> faults;
    if (p_synd <= 0.0 || n_atoms <= 0)
        return faults;
    if (p_synd >= 1.0) {
        faults.resize(n_atoms);
        for (long i = 0; i < n_atoms; ++i)
            faults[i] = i;
        return faults;
    }
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(trial + 0x632be59bd9b4e019ULL)));
    // Geometric gaps between faulty atoms: same law as independent Bernoulli draws.
    const double log_q = std::log1p(-p_synd);
    long index = -1;
    while (true) {
        const double gap = std::floor(std::log(open_unit(rng)) / log_q);
        if (gap >= static_cast<double>(n_atoms))
            break;
        index += static_cast<long>(gap) + 1;
        if (index >= n_atoms)
            break;
        faults.push_back(index);
    }
    return faults;
}

QueryTrace simulate_extraction(const SearchConfig& cfg, const std::optional<std::vector<long>>& planted_faults,
                               bool record_events)
{
    cfg.validate();
    QueryTrace trace;
    if (planted_faults) {
        trace.planted_faults = *planted_faults;
        std::sort(trace.planted_faults.begin(), trace.planted_faults.end());
        trace.planted_faults.erase(std::unique(trace.planted_faults.begin(), trace.planted_faults.end()),
                                   trace.planted_faults.end());
        for (long f : trace.planted_faults)
            require(f >= 0 && f < cfg.n_atoms, "planted fault outside the atom range");
    } else {
        trace.planted_faults = draw_faults(cfg.n_atoms, cfg.p_synd, cfg.rng_seed, 0);
    }

    auto record = [&](long round, int mode, long batch, int begin, int end, bool positive) {
        if (record_events)
            trace.events.push_back({round * cfg.t_query_s, mode, batch, begin, end, positive});
    };
    const Run run = run_protocol(cfg, trace.planted_faults, record);

    std::stable_sort(trace.events.begin(), trace.events.end(), [](const QueryEvent& a, const QueryEvent& b) {
        return a.time_s < b.time_s || (a.time_s == b.time_s && a.mode < b.mode);
    });
    trace.total_queries = run.total_queries;
    trace.rounds = run.rounds;
    trace.total_time_s = run.rounds * cfg.t_query_s;
    trace.batch_model_time_s = batch_model_time(cfg, run);
    trace.identified_faults = run.identified;
    return trace;
}

MonteCarloSummary monte_carlo(const SearchConfig& cfg, long trials)
{
    cfg.validate();
    require(trials >= 1, "Monte Carlo needs at least one trial");
    std::vector<double> wall(trials), model(trials);

    auto worker = [&](long begin, long end) {
        auto ignore = [](long, int, long, int, int, bool) {};
        for (long t = begin; t < end; ++t) {
            const auto faults = draw_faults(cfg.n_atoms, cfg.p_synd, cfg.rng_seed, static_cast<std::uint64_t>(t));
            const Run run = run_protocol(cfg, faults, ignore);
            wall[t] = run.rounds * cfg.t_query_s;
            model[t] = batch_model_time(cfg, run);
        }
    };
    const long threads = std::clamp<long>(std::thread::hardware_concurrency(), 1, 16);
    if (threads == 1 || trials < 64) {
        worker(0, trials);
    } else {
        std::vector<std::jthread> pool;
        const long chunk = (trials + threads - 1) / threads;
        for (long begin = 0; begin < trials; begin += chunk)
            pool.emplace_back(worker, begin, std::min(trials, begin + chunk));
    }

    // Per-trial slots are reduced in index order, so results do not depend on scheduling.
    auto moments = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            mean += (v[i] - mean) / static_cast<double>(i + 1);
        double m2 = 0.0;
        for (double x : v)
            m2 += (x - mean) * (x - mean);
        return std::pair{mean, v.size() > 1 ? std::sqrt(m2 / static_cast<double>(v.size() - 1)) : 0.0};
    };
    MonteCarloSummary summary;
    summary.trials = trials;
    std::tie(summary.mean_time_s, summary.std_time_s) = moments(wall);
    std::tie(summary.mean_batch_model_time_s, summary.std_batch_model_time_s) = moments(model);
    return summary;
}

std::vector<ScalingRow> scaling_report(std::span<const long> n_grid, const SearchConfig& base, long mc_trials)
{
    base.validate();
    require(!n_grid.empty(), "scaling grid is empty");
    require(std::is_sorted(n_grid.begin(), n_grid.end()) && n_grid.front() > 0,
            "scaling grid must be positive and ascending");

    std::vector<ScalingRow> rows;
    for (long n : n_grid) {
        rows.push_back({n, "free_space", base.free_space_time_s, 0.0});
        for (int modes : {1, base.n_modes}) {
            const std::string name = modes == 1 ? "single_mode" : "multimode";
            const int batch = effective_batch(n, base.n_batch, modes);
            rows.push_back({n, name, total_steps(n, batch, modes, base.p_synd) * base.t_query_s, 0.0});
            if (mc_trials > 0) {
                SearchConfig cfg = base;
                cfg.n_atoms = n;
                cfg.n_modes = modes;
                const auto mc = monte_carlo(cfg, mc_trials);
                rows.push_back({n, name + "_mc", mc.mean_time_s, mc.std_time_s});
            }
            if (base.n_modes == 1)
                break;
        }
    }
    return rows;
}

} // namespace cmm::syndrome
