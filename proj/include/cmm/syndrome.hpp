#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cmm::syndrome {

struct SearchConfig {
    long n_atoms = 0;
    int n_batch = 256;          // maximum batch size
    int n_modes = 1;
    double p_synd = 5e-3;
    double t_query_s = 10e-6;
    double free_space_time_s = 5e-3;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// m = 1 + n_batch p [1 + log2 n_batch]: one global check plus a binary search
/// and a confirming check per faulty syndrome.
double expected_queries_per_batch(double n_batch, double p_synd);

/// ceil(N / (n_batch n_modes)) * m
double total_steps(long n_atoms, int n_batch, int n_modes, double p_synd);

/// min(n_batch_max, ceil(N / n_modes))
int effective_batch(long n_atoms, int n_batch_max, int n_modes);

struct QueryEvent {
    double time_s = 0.0;
    int mode = 0;
    long register_id = 0;       // batch index
    int subset_begin = 0;       // batch-local half-open range of coupled atoms
    int subset_end = 0;
    bool positive = false;
};

struct QueryTrace {
    std::vector<QueryEvent> events;   // ordered by (time, mode)
    long total_queries = 0;
    long rounds = 0;                  // lockstep rounds until every mode is idle
    double total_time_s = 0.0;
    /// Mean queries per batch times the number of batches each mode handles in
    /// sequence, times t_query: the quantity the closed-form step count predicts.
    double batch_model_time_s = 0.0;
    std::vector<long> planted_faults;
    std::vector<long> identified_faults;
};

/// Global check / left-first binary search / confirming check on one batch.
/// `faults` holds batch-local indices (sorted) and is consumed. Returns the
/// number of queries; `emit(begin, end, positive)` sees every query in order.
template <typename Emit>
int search_batch(std::vector<int>& faults, int batch_size, std::vector<int>& found, Emit&& emit);

int search_batch(std::vector<int> faults, int batch_size, std::vector<int>* found = nullptr);

QueryTrace simulate_extraction(const SearchConfig& cfg,
                               const std::optional<std::vector<long>>& planted_faults = std::nullopt,
                               bool record_events = true);

/// Independent fault draw for trial `trial` of a seeded experiment.
std::vector<long> draw_faults(long n_atoms, double p_synd, std::uint64_t seed, std::uint64_t trial);

struct MonteCarloSummary {
    long trials = 0;
    double mean_time_s = 0.0;          // lockstep wall time
    double std_time_s = 0.0;
    double mean_batch_model_time_s = 0.0;
    double std_batch_model_time_s = 0.0;
};

MonteCarloSummary monte_carlo(const SearchConfig& cfg, long trials);

struct ScalingRow {
    long n_atoms = 0;
    std::string variant;
    double mean_time_s = 0.0;
    double std_time_s = 0.0;
};

/// Free-space constant, closed-form single-mode and multimode curves, and (when
/// mc_trials > 0) Monte Carlo wall-time overlays for both cavity variants.
std::vector<ScalingRow> scaling_report(std::span<const long> n_grid, const SearchConfig& base, long mc_trials);

// ---------------------------------------------------------------------------

template <typename Emit>
int search_batch(std::vector<int>& faults, int batch_size, std::vector<int>& found, Emit&& emit)
{
    auto any_in = [&faults](int begin, int end) {
        for (int f : faults)
            if (f >= begin && f < end)
                return true;
        return false;
    };
    int queries = 0;
    while (true) {
        const bool positive = !faults.empty();
        emit(0, batch_size, positive);
        ++queries;
        if (!positive)
            break;
        int lo = 0, hi = batch_size;
        while (hi - lo > 1) {
            const int mid = lo + (hi - lo + 1) / 2;
            const bool left = any_in(lo, mid);
            emit(lo, mid, left);
            ++queries;
            if (left)
                hi = mid;
            else
                lo = mid;
        }
        found.push_back(lo);
        std::erase(faults, lo);
    }
    return queries;
}

} // namespace cmm::syndrome
