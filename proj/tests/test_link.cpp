#include "cmm/common.hpp"
#include "cmm/link.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace cmm;
using namespace cmm::link;

namespace {

// Direct summation of binomial terms in long double, each built from a
// multiplicative recurrence rather than log-gamma.
long double binomial_tail_direct(int n, long double p, int k)
{
    long double term = std::pow(1.0L - p, n);   // P(X = 0)
    long double tail = k <= 0 ? term : 0.0L;
    for (int j = 1; j <= n; ++j) {
        term *= static_cast<long double>(n - j + 1) / j * p / (1.0L - p);
        if (j >= k)
            tail += term;
    }
    return tail;
}

} // namespace

TEST_CASE("interface efficiency")
{
    const double a = alpha_interface(7.0, hz_to_rad(2.3e6), hz_to_rad(38e3));
    CHECK(a == doctest::Approx(7.0 / 8.0 * 2.3 / 2.338).epsilon(1e-12));
    CHECK(std::abs(a - 0.861) <= 0.001);
    CHECK(alpha_interface(0.0, 1.0, 1.0) == 0.0);
    CHECK(alpha_interface(1e6, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-5));
    LinkBudget budget;
    budget.kappa_e_rad_s = hz_to_rad(2.3e6);
    budget.kappa_i_rad_s = hz_to_rad(38e3);
    CHECK(alpha_interface(budget) == a);
}

TEST_CASE("Bell-pair success probability")
{
    const double a = alpha_interface(7.0, hz_to_rad(2.3e6), hz_to_rad(38e3));
    const double p = bell_success(a, 0.75);
    CHECK(std::abs(p - 0.208) <= 0.002);
    CHECK(p == doctest::Approx(0.5 * std::pow(a * 0.75, 2)));
    CHECK(bell_success(a, 0.0) == 0.0);
    CHECK(bell_success(1.0, 1.0) == 0.5);
    CHECK(bell_success(a, 1.0) == doctest::Approx(0.371).epsilon(1e-3));
    CHECK_THROWS_AS(bell_success(1.2, 0.5), ValidationError);
}

TEST_CASE("multiplexed rate")
{
    CHECK(bell_rate(0.18, 15, 0.675e-6) == doctest::Approx(4.0e6));
    CHECK(bell_rate(0.18, 1, 0.8e-6) == doctest::Approx(225e3));
    CHECK(bell_rate(0.0, 15, 0.675e-6) == 0.0);
    CHECK(bell_rate(0.18, 15, 0.675e-6) / bell_rate(0.18, 1, 0.675e-6) == doctest::Approx(15.0));
}

TEST_CASE("binomial tail matches direct summation")
{
    for (auto [n, p] : {std::pair{225, 0.18}, {225, 0.2084}, {50, 0.5}, {10, 0.01}, {1000, 0.003}})
        for (int k : {0, 1, 5, 20, 40, 41, 60, n})
            CHECK(binomial_tail(n, p, k) == doctest::Approx(static_cast<double>(binomial_tail_direct(n, p, k)))
                                                .epsilon(1e-10)
                                                .scale(1e-300));
    CHECK(binomial_tail(10, 0.3, 11) == 0.0);
}

TEST_CASE("pairs from one scan")
{
    const auto y = pairs_from_scan(225, 0.18, 40);
    CHECK(y.expected == doctest::Approx(40.5));
    CHECK(y.expected >= 40.0);
    CHECK(y.variance == doctest::Approx(225 * 0.18 * 0.82));
    CHECK(y.p_at_least == doctest::Approx(static_cast<double>(binomial_tail_direct(225, 0.18L, 40))).epsilon(1e-10));
    CHECK(pairs_from_scan(225, 1.0, 40).expected == 225.0);
    CHECK(pairs_from_scan(225, 1.0, 225).p_at_least == doctest::Approx(1.0));
}

TEST_CASE("sampled pair counts agree with the binomial model")
{
    const auto y = pairs_from_scan(225, 0.18, 40);
    std::mt19937_64 rng(20251019);
    std::bernoulli_distribution herald(0.18);
    const int scans = 20000;
    double sum = 0.0;
    int at_least = 0;
    for (int s = 0; s < scans; ++s) {
        int pairs = 0;
        for (int a = 0; a < 225; ++a)
            pairs += herald(rng);
        sum += pairs;
        at_least += pairs >= 40;
    }
    const double mean = sum / scans;
    CHECK(std::abs(mean - y.expected) < 3.0 * std::sqrt(y.variance / scans));
    const double frac = static_cast<double>(at_least) / scans;
    CHECK(std::abs(frac - y.p_at_least) < 3.0 * std::sqrt(y.p_at_least * (1 - y.p_at_least) / scans));
}

TEST_CASE("scan time")
{
    AttemptSchedule s;
    CHECK(scan_time(s) == doctest::Approx(12e-6));
    s.photon_window_s = 0.0;
    CHECK(scan_time(s) == doctest::Approx(1.5e-6));
    AttemptSchedule one;
    one.atoms_per_register = 1;
    CHECK(scan_time(one) == doctest::Approx(0.8e-6));
}

TEST_CASE("CNOT cycle budget")
{
    const auto b = cnot_cycle_budget(CycleInputs{}, AttemptSchedule{});
    CHECK(b.measurement_time_s == doctest::Approx(40.0 / 15.0 * 10e-6));
    CHECK(b.total_s == doctest::Approx(16e-6 + 12e-6 + 20e-6 + 40.0 / 15.0 * 10e-6));
    CHECK(b.total_s >= 60e-6);
    CHECK(b.total_s <= 80e-6);
    CHECK(b.total_ceiling_s == doctest::Approx(78e-6));

    CycleInputs none;
    none.pairs_needed = 0;
    const auto z = cnot_cycle_budget(none, AttemptSchedule{});
    CHECK(z.total_s == doctest::Approx(16e-6 + 12e-6 + 20e-6));

    CycleInputs single;
    single.n_modes = 1;
    CHECK(cnot_cycle_budget(single, AttemptSchedule{}).measurement_time_s == doctest::Approx(400e-6));
}

TEST_CASE("free-space baseline is linear in the number of qubits")
{
    CHECK(free_space_baseline(250.0, 4000) == doctest::Approx(1e6));
    CHECK(free_space_baseline(250.0, 1) == 250.0);
    CHECK(free_space_baseline(250.0, 0) == 0.0);
}
