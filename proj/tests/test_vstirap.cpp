#include "cmm/common.hpp"
#include "cmm/link.hpp"
#include "cmm/vstirap.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace cmm;
using namespace cmm::vstirap;

namespace {

DynamicsParams link_params(double eta = 7.0)
{
    DynamicsParams p;
    p.eta = eta;
    p.kappa_e_rad_s = hz_to_rad(2.3e6);
    p.kappa_i_rad_s = hz_to_rad(38e3);
    return p;
}

const double kPeak = hz_to_rad(30e6);

// Ramp to the peak, then hold long enough for the cavity to empty.
DriveProfile ramp(double slope)
{
    return DriveProfile::linear(slope, kPeak / slope + 2e-6, kPeak);
}

// Default calibrated drive of the link configuration.
DriveProfile calibrated()
{
    return DriveProfile::linear(1.104198e14, 3e-6, kPeak);
}

double emission(const HilbertSpec& spec, const DynamicsParams& p, const DriveProfile& d,
                const EvolveOptions& o = {})
{
    return emission_probability(evolve(build_generator(spec, p, d), o));
}

} // namespace

TEST_CASE("coupling follows the cooperativity convention")
{
    const auto p = link_params();
    const double g = p.coupling_rad_s();
    CHECK(g * g == doctest::Approx(7.0 * p.kappa_rad_s() * p.gamma_rad_s / 4.0));
    CHECK(rad_to_hz(g) == doctest::Approx(std::sqrt(7.0 * 2.338e6 * 3.95e6 / 4.0)).epsilon(1e-9));
}

TEST_CASE("Hilbert space dimension")
{
    CHECK(HilbertSpec{1, false}.dimension() == 10);
    CHECK(HilbertSpec{2, false}.dimension() == 15);
    CHECK(HilbertSpec{1, true}.dimension() == 20);
    CHECK_THROWS_AS(HilbertSpec({3, true}).validate(), ValidationError);
    CHECK_THROWS_AS(HilbertSpec({0, false}).validate(), ValidationError);
}

TEST_CASE("zero drive leaves the ground state dark")
{
    const auto traj = evolve(build_generator({}, link_params(), DriveProfile::zero(2e-6)));
    for (double c : traj.cumulative_emission)
        CHECK(c == 0.0);
    for (const auto& pop : traj.populations)
        CHECK(pop[kGround] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("no atom-cavity coupling means no photons")
{
    auto p = link_params(0.0);
    const auto traj = evolve(build_generator({}, p, ramp(1e13)));
    for (double f : traj.photon_flux)
        CHECK(std::abs(f) < 1e-12);
    CHECK(emission_probability(traj) < 1e-12);
    // The atom is still excited and decays into the qubit and sink levels.
    CHECK(traj.populations.back()[kGround] < 0.5);
}

TEST_CASE("constant drive reaches the two-level steady state")
{
    // No cavity coupling and all spontaneous decay back to g: a textbook
    // driven two-level atom with rho_ee = (W^2/4) / (d^2 + G^2/4 + W^2/2).
    auto p = link_params(0.0);
    p.branching = {{"g", 1.0}};
    const double gamma = p.gamma_rad_s;
    for (auto [rabi, det] : {std::pair{0.5 * gamma, 0.0}, {2.0 * gamma, 0.0}, {gamma, 1.5 * gamma}}) {
        p.atom_detuning_rad_s = det;
        DriveProfile d;
        d.shape = DriveShape::Table;
        d.duration_s = 40.0 / gamma;
        d.table = {{0.0, rabi}, {d.duration_s, rabi}};
        const auto traj = evolve(build_generator({}, p, d));
        const double expected = 0.25 * rabi * rabi / (det * det + 0.25 * gamma * gamma + 0.5 * rabi * rabi);
        CHECK(traj.populations.back()[kExcited] == doctest::Approx(expected).epsilon(1e-5));
    }
}

TEST_CASE("adiabatic emission matches the closed-form interface efficiency")
{
    for (double eta : {1.0, 3.0, 7.0, 20.0}) {
        const auto p = link_params(eta);
        const auto traj = evolve(build_generator({}, p, ramp(1e12)));
        const double closed = link::alpha_interface(eta, p.kappa_e_rad_s, p.kappa_i_rad_s);
        CHECK(emission_probability(traj) == doctest::Approx(closed).epsilon(0.03));
        CHECK(traj.trace_error < 1e-6);
        CHECK(traj.min_eigenvalue > -1e-8);
    }
    // Lossless cavity at eta = 1: one half.
    auto p = link_params(1.0);
    p.kappa_i_rad_s = 0.0;
    CHECK(emission({}, p, ramp(1e12)) == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("trajectory invariants")
{
    const auto traj = evolve(build_generator({}, link_params(), calibrated()));
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(3e-6));
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        CHECK(traj.photon_flux[i] >= -1e-6 * traj.photon_flux.size());
        CHECK(traj.cumulative_emission[i] <= 1.0);
        if (i > 0)
            CHECK(traj.cumulative_emission[i] >= traj.cumulative_emission[i - 1] - 1e-12);
        double total = 0.0;
        for (double pop : traj.populations[i])
            total += pop;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("trace and positivity hold for random physical parameters")
{
    std::mt19937_64 rng(20251019);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int draw = 0; draw < 6; ++draw) {
        DynamicsParams p;
        p.eta = 0.5 + 25.0 * unit(rng);
        p.kappa_e_rad_s = hz_to_rad(0.1e6 + 5e6 * unit(rng));
        p.kappa_i_rad_s = hz_to_rad(0.1e6 * unit(rng));
        p.gamma_rad_s = hz_to_rad(1e6 + 6e6 * unit(rng));
        p.atom_detuning_rad_s = hz_to_rad(20e6 * (unit(rng) - 0.5));
        p.cavity_detuning_rad_s = hz_to_rad(2e6 * (unit(rng) - 0.5));
        p.cavity_weight_q0 = unit(rng);
        const double sink = 0.3 * unit(rng);
        p.branching = {{"q0", (1 - sink) / 2}, {"q1", (1 - sink) / 2}, {"sink", sink}};
        const double slope = std::exp(std::log(1e13) + std::log(30.0) * unit(rng));
        const auto traj = evolve(build_generator({}, p, ramp(slope)));
        CHECK(traj.trace_error < 1e-6);
        CHECK(traj.min_eigenvalue > -1e-8);
        CHECK(emission_probability(traj) <= link::alpha_interface(p.eta, p.kappa_e_rad_s, p.kappa_i_rad_s) + 1e-3);
    }
}

TEST_CASE("Fock cutoff and polarization model do not change the emission")
{
    const auto p = link_params();
    const double c1 = emission({1, false}, p, calibrated());
    CHECK(std::abs(emission({2, false}, p, calibrated()) - c1) < 1e-3);
    CHECK(std::abs(emission({1, true}, p, calibrated()) - c1) < 1e-3);
}

TEST_CASE("adaptive integration agrees with a fixed-step reference")
{
    const auto p = link_params();
    const auto gen = build_generator({}, p, calibrated());
    const auto adaptive = evolve(gen);
    EvolveOptions fixed;
    fixed.integrator = Integrator::FixedRk4;
    fixed.fixed_steps = 40000;
    const auto reference = evolve(gen, fixed);
    CHECK(emission_probability(adaptive) == doctest::Approx(emission_probability(reference)).epsilon(1e-6));
    for (std::size_t i = 0; i < adaptive.times.size(); i += 40)
        CHECK(adaptive.cumulative_emission[i]
              == doctest::Approx(reference.cumulative_emission[i]).epsilon(1e-5).scale(1e-6));
}

TEST_CASE("steeper ramps give shorter photons and lower emission")
{
    const auto p = link_params();
    double last_emission = 1.0, last_width = 1.0;
    for (double slope : {1e13, 3e13, 1e14, 3e14}) {
        const auto traj = evolve(build_generator({}, p, ramp(slope)));
        const double e = emission_probability(traj);
        const double w = photon_shape(traj).rms_width_s;
        CHECK(e <= last_emission);
        CHECK(w <= last_width);
        last_emission = e;
        last_width = w;
    }
}

TEST_CASE("array average")
{
    const auto p = link_params();
    const auto zero = array_average_success(std::vector<double>(10, 0.0), {}, p, ramp(1e13), 0.75, 20);
    CHECK(zero.mean_p_success == 0.0);

    const auto uniform = array_average_success(std::vector<double>(10, 7.0), {}, p, ramp(1e13), 0.75, 20);
    CHECK(std::abs(uniform.mean_p_success - 0.208) < 0.002);
    CHECK(uniform.eta_grid.size() == 20);
    CHECK_THROWS_AS(array_average_success({7.0}, {}, p, ramp(1e13), 0.75, 5), ValidationError);
}

TEST_CASE("detuning sensitivity is even in the detuning")
{
    const auto p = link_params();
    const double d = hz_to_rad(6e6);
    const auto points = detuning_sensitivity({}, p, calibrated(), {-d, 0.0, hz_to_rad(1e6), d});
    REQUIRE(points.size() == 4);
    CHECK(points[1].relative_change == 0.0);
    CHECK(points[0].relative_change == doctest::Approx(points[3].relative_change).epsilon(0.1));
    CHECK(std::abs(points[2].relative_change) < std::abs(points[3].relative_change));
    // Both atoms see the detuning, so the change is the squared emission ratio.
    CHECK(points[3].relative_change == doctest::Approx(std::pow(points[3].emission / points[1].emission, 2) - 1.0));
    CHECK_THROWS_AS(detuning_sensitivity({}, p, calibrated(), {d}), ValidationError);

    for (const auto& point : detuning_sensitivity({}, p, DriveProfile::zero(1e-6), {-d, 0.0, d}))
        CHECK(point.relative_change == 0.0);
}

// At the calibrated ramp the squared change is about 1.2%. The single-atom
// ratio is about 0.6% and a slower ramp brings both under 1%.
TEST_CASE("6 MHz atomic detuning changes the pair probability by under one percent" * doctest::may_fail())
{
    const auto points = detuning_sensitivity({}, link_params(), calibrated(), {0.0, hz_to_rad(6e6)});
    CHECK(std::abs(points[1].relative_change) < 0.01);
}

TEST_CASE("ramp calibration recovers the shipped slope")
{
    const auto p = link_params();
    const double slope = calibrate_ramp_slope({}, p, calibrated(), 0.83, 5e13, 3e14);
    CHECK(slope == doctest::Approx(1.104198e14).epsilon(1e-3));
    CHECK(emission({}, p, DriveProfile::linear(slope, 3e-6, kPeak)) == doctest::Approx(0.83).epsilon(1e-4));
    CHECK_THROWS_AS(calibrate_ramp_slope({}, p, calibrated(), 0.99, 5e13, 3e14), NumericalError);
}

TEST_CASE("integration budget overrun is a numerical error")
{
    EvolveOptions tight;
    tight.max_rhs_evaluations = 100;
    CHECK_THROWS_AS(evolve(build_generator({}, link_params(), calibrated()), tight), NumericalError);
}

TEST_CASE("invalid dynamics parameters are rejected")
{
    auto p = link_params();
    p.kappa_e_rad_s = -1.0;
    CHECK_THROWS_AS(build_generator({}, p, calibrated()), ValidationError);
    p = link_params();
    p.branching = {{"q0", 0.7}};
    CHECK_THROWS_AS(build_generator({}, p, calibrated()), ValidationError);
    CHECK_THROWS_AS(build_generator({}, link_params(), DriveProfile::linear(-1.0, 1e-6)), ValidationError);
}
