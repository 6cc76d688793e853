#include "cmm/common.hpp"
#include "cmm/syndrome.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"

using namespace cmm;
using namespace cmm::syndrome;

namespace {

SearchConfig config(long n, int batch, int modes, double p = 5e-3, std::uint64_t seed = 11)
{
    SearchConfig cfg;
    cfg.n_atoms = n;
    cfg.n_batch = batch;
    cfg.n_modes = modes;
    cfg.p_synd = p;
    cfg.rng_seed = seed;
    return cfg;
}

int log2_exact(int n)
{
    return std::countr_zero(static_cast<unsigned>(n));
}

} // namespace

TEST_CASE("expected queries per batch")
{
    CHECK(expected_queries_per_batch(256, 0.0) == 1.0);
    CHECK(expected_queries_per_batch(17, 0.0) == 1.0);
    CHECK(expected_queries_per_batch(256, 5e-3) == doctest::Approx(1.0 + 1.28 * 9.0));
    CHECK(expected_queries_per_batch(256, 5e-3) == doctest::Approx(12.52));
    CHECK(expected_queries_per_batch(128, 5e-3) == doctest::Approx(6.12));
}

TEST_CASE("closed-form step counts")
{
    CHECK(total_steps(2048, 256, 1, 5e-3) == doctest::Approx(8 * 12.52));
    CHECK(total_steps(2048, 256, 1, 5e-3) * 10e-6 == doctest::Approx(1.0e-3).epsilon(0.01));

    const int batch = effective_batch(5000, 256, 50);
    CHECK(batch == 100);
    const double t = total_steps(5000, batch, 50, 5e-3) * 10e-6;
    CHECK(t == doctest::Approx(10e-6 * (1.0 + 0.5 * (1.0 + std::log2(100.0)))));
    CHECK(t >= 48e-6);
    CHECK(t <= 62e-6);
    CHECK(5e-3 / t >= 80.0);

    CHECK(total_steps(64, 1, 64, 5e-3) == doctest::Approx(1.005));
    CHECK(effective_batch(64, 256, 64) == 1);
}

TEST_CASE("one planted fault in a full batch takes 1 + 8 + 1 queries")
{
    for (long atom : {0L, 1L, 127L, 128L, 255L}) {
        const auto trace = simulate_extraction(config(256, 256, 1), std::vector<long>{atom});
        CHECK(trace.total_queries == 10);
        REQUIRE(trace.identified_faults.size() == 1);
        CHECK(trace.identified_faults[0] == atom);
    }
}

TEST_CASE("every fault pattern is identified exactly for batches up to 16")
{
    for (int n = 1; n <= 16; ++n) {
        const bool power_of_two = std::has_single_bit(static_cast<unsigned>(n));
        const int depth = static_cast<int>(std::bit_width(static_cast<unsigned>(n - 1)));   // ceil(log2 n)
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            std::vector<int> faults;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i))
                    faults.push_back(i);
            const int k = static_cast<int>(faults.size());
            std::vector<int> found;
            const int queries = search_batch(faults, n, &found);
            std::sort(found.begin(), found.end());
            REQUIRE(found == faults);
            // One global check per fault plus the final clean one, and a
            // binary search of at most ceil(log2 n) steps per fault.
            if (power_of_two)
                REQUIRE(queries == 1 + k * (1 + log2_exact(n)));
            else
                REQUIRE(queries <= 1 + k * (1 + depth));
        }
    }
}

TEST_CASE("query events are consistent with the planted faults")
{
    const std::vector<long> planted{3, 40, 41, 200, 777, 1500, 4999};
    const auto trace = simulate_extraction(config(5000, 256, 50), planted);
    CHECK(trace.identified_faults == planted);
    CHECK(static_cast<long>(trace.events.size()) == trace.total_queries);
    // Replay each register's queries: an atom leaves the active set once its
    // binary search has narrowed to it, and every outcome must match the set.
    struct Replay {
        std::set<long> active;
        long lo = 0, hi = 0;
    };
    std::map<long, Replay> registers;
    for (long f : planted)
        registers[f / 100].active.insert(f % 100);
    for (const auto& e : trace.events) {
        auto& r = registers[e.register_id];
        const bool any = r.active.lower_bound(e.subset_begin) != r.active.lower_bound(e.subset_end);
        CHECK(any == e.positive);
        CHECK(e.mode == e.register_id % 50);
        const bool global = e.subset_begin == 0 && e.subset_end == 100;
        if (global && e.positive) {
            r.lo = 0;
            r.hi = 100;
        } else if (!global) {
            if (e.positive)
                r.hi = e.subset_end;
            else
                r.lo = e.subset_end;
            if (r.hi - r.lo == 1)
                r.active.erase(r.lo);
        }
    }
    for (const auto& [id, r] : registers)
        CHECK(r.active.empty());
    for (std::size_t i = 1; i < trace.events.size(); ++i)
        CHECK(trace.events[i - 1].time_s <= trace.events[i].time_s);
}

TEST_CASE("no faults gives pure batch steps")
{
    struct Case {
        long n;
        int batch;
        int modes;
    };
    for (auto [n, batch, modes] : {Case{5000, 256, 1}, Case{5000, 256, 50}, Case{1000, 64, 3}, Case{7, 256, 2}}) {
        const auto cfg = config(n, batch, modes, 0.0);
        const auto trace = simulate_extraction(cfg);
        const long b = effective_batch(n, batch, modes);
        const long rounds = ((n + b - 1) / b + modes - 1) / modes;
        CHECK(trace.rounds == rounds);
        CHECK(trace.total_time_s == doctest::Approx(rounds * 10e-6));
        CHECK(trace.total_time_s == doctest::Approx(total_steps(n, static_cast<int>(b), modes, 0.0) * 10e-6));
    }
}

TEST_CASE("fault draws follow independent Bernoulli statistics")
{
    const long n = 200000;
    const double p = 5e-3;
    const auto faults = draw_faults(n, p, 99, 0);
    const double expected = n * p;
    CHECK(std::abs(faults.size() - expected) < 5.0 * std::sqrt(expected * (1 - p)));
    CHECK(std::is_sorted(faults.begin(), faults.end()));
    CHECK(std::adjacent_find(faults.begin(), faults.end()) == faults.end());
    CHECK(draw_faults(n, p, 99, 0) == faults);
    CHECK(draw_faults(n, p, 99, 1) != faults);
    CHECK(draw_faults(n, p, 100, 0) != faults);
    CHECK(draw_faults(10, 1.0, 1, 0).size() == 10);
    CHECK(draw_faults(10, 0.0, 1, 0).empty());

    // Count of faults in a small register over many trials: binomial variance.
    const int trials = 20000;
    double sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double k = static_cast<double>(draw_faults(100, 0.05, 5, t).size());
        sum += k;
        sum2 += k * k;
    }
    const double mean = sum / trials;
    const double var = sum2 / trials - mean * mean;
    CHECK(mean == doctest::Approx(5.0).epsilon(0.02));
    CHECK(var == doctest::Approx(100 * 0.05 * 0.95).epsilon(0.05));
}

TEST_CASE("Monte Carlo is deterministic and tracks the closed form")
{
    const auto cfg = config(5000, 256, 50, 5e-3, 20251019);
    const auto a = monte_carlo(cfg, 4000);
    const auto b = monte_carlo(cfg, 4000);
    CHECK(a.mean_time_s == b.mean_time_s);
    CHECK(a.std_time_s == b.std_time_s);
    CHECK(a.mean_batch_model_time_s == b.mean_batch_model_time_s);
    const double closed = total_steps(5000, 100, 50, 5e-3) * 10e-6;
    CHECK(a.mean_batch_model_time_s == doctest::Approx(closed).epsilon(0.1));
    // The slowest of 50 modes sets the wall time, so it exceeds the mean-based model.
    CHECK(a.mean_time_s > a.mean_batch_model_time_s);

    const auto single = monte_carlo(config(2048, 256, 1, 5e-3, 7), 4000);
    CHECK(single.mean_batch_model_time_s == doctest::Approx(total_steps(2048, 256, 1, 5e-3) * 10e-6).epsilon(0.1));
    CHECK(single.mean_time_s == doctest::Approx(single.mean_batch_model_time_s).epsilon(1e-12));
}

TEST_CASE("scaling report variants")
{
    const std::vector<long> grid{256, 5000};
    const auto rows = scaling_report(grid, config(0, 256, 50), 0);
    REQUIRE(rows.size() == 6);
    double free_space = 0.0, multimode = 0.0;
    for (const auto& r : rows) {
        if (r.n_atoms != 5000)
            continue;
        if (r.variant == "free_space")
            free_space = r.mean_time_s;
        if (r.variant == "multimode")
            multimode = r.mean_time_s;
    }
    CHECK(free_space == 5e-3);
    CHECK(free_space / multimode == doctest::Approx(100.0).epsilon(0.2));
    CHECK(scaling_report(grid, config(0, 256, 50), 10).size() == 10);
}

TEST_CASE("invalid search configurations are rejected")
{
    CHECK_THROWS_AS(config(-1, 256, 1).validate(), ValidationError);
    CHECK_THROWS_AS(config(10, 0, 1).validate(), ValidationError);
    CHECK_THROWS_AS(config(10, 16, 0).validate(), ValidationError);
    CHECK_THROWS_AS(config(10, 16, 1, 1.5).validate(), ValidationError);
    CHECK_THROWS_AS(simulate_extraction(config(10, 16, 1), std::vector<long>{10}), ValidationError);
}
