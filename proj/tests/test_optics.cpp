#include "cmm/common.hpp"
#include "cmm/optics.hpp"
#include "cmm/quadrature.hpp"

#include <cmath>
#include <numeric>

#include "doctest.h"

using namespace cmm;
using namespace cmm::optics;

namespace {

CavityGeometry readout_cavity()
{
    return CavityGeometry::from_losses(25e-3, 20e-6, 780e-9, 6e4, 5e-6);
}

CavityGeometry link_cavity()
{
    return CavityGeometry::from_losses(6.25e-3, 8.6e-6, 780e-9, 1e4, 1e-5);
}

double factorial(int n)
{
    return std::tgamma(n + 1.0);
}

// Waist-plane intensities written directly from the textbook mode formulas
// with the standard library's physicists' Hermite and Laguerre polynomials.
double hg_intensity_reference(int n, double w0, double x, double y)
{
    const double norm = 2.0 / (kPi * w0 * w0) / (std::pow(2.0, n) * factorial(n));
    const double h = std::hermite(n, std::sqrt(2.0) * x / w0);
    return norm * h * h * std::exp(-2.0 * (x * x + y * y) / (w0 * w0));
}

double lg_intensity_reference(int p, double w0, double r)
{
    const double l = std::laguerre(p, 2.0 * r * r / (w0 * w0));
    return 2.0 / (kPi * w0 * w0) * l * l * std::exp(-2.0 * r * r / (w0 * w0));
}

} // namespace

TEST_CASE("free spectral range and linewidth follow from length and finesse")
{
    const auto p = derived_params(readout_cavity());
    CHECK(p.fsr_hz == doctest::Approx(kSpeedOfLight / (2.0 * 25e-3)).epsilon(1e-12));
    CHECK(p.linewidth_hz == doctest::Approx(p.fsr_hz / 6e4).epsilon(1e-12));
    // Everything beyond the intrinsic loss leaves through the coupler.
    const double total_loss = kTwoPi / 6e4;
    CHECK(p.kappa_i_rad_s / p.kappa_rad_s() == doctest::Approx(5e-6 / total_loss).epsilon(1e-9));
}

TEST_CASE("Rayleigh range and Gouy phase per order")
{
    const auto geom = readout_cavity();
    const double zr = kPi * 20e-6 * 20e-6 / 780e-9;
    CHECK(geom.rayleigh_range() == doctest::Approx(zr).epsilon(1e-12));
    const auto p = derived_params(geom);
    // Mirror-to-mirror Gouy phase of a symmetric cavity per transverse order.
    CHECK(p.gouy_per_order_rad == doctest::Approx(2.0 * std::atan(25e-3 / (2.0 * zr))).epsilon(1e-12));
}

TEST_CASE("HG and LG mode intensities match the textbook formulas")
{
    const auto geom = readout_cavity();
    const double w0 = geom.waist_m;
    for (int n : {0, 1, 2, 5, 12, 24}) {
        for (double x : {-2.1e-5, -3e-6, 0.0, 7.7e-6, 4.4e-5}) {
            const double y = 3e-6;
            const double ref = hg_intensity_reference(n, w0, x, y);
            CHECK(mode_intensity(TransverseMode::hg(n), geom, x, y, 0.0)
                  == doctest::Approx(ref).epsilon(1e-10).scale(1e-12 * hg_intensity_reference(0, w0, 0, 0)));
        }
    }
    for (int p : {0, 1, 4, 16, 32}) {
        for (double r : {0.0, 1e-6, 5e-6, 1.7e-5}) {
            const double ref = lg_intensity_reference(p, w0, r);
            CHECK(mode_intensity(TransverseMode::lg(p), geom, r / std::sqrt(2.0), r / std::sqrt(2.0), 0.0)
                  == doctest::Approx(ref).epsilon(1e-10).scale(1e-12 * lg_intensity_reference(0, w0, 0)));
        }
    }
}

TEST_CASE("beam expands with z as w(z) = w0 sqrt(1 + z^2 / zR^2)")
{
    const auto geom = readout_cavity();
    const double zr = geom.rayleigh_range();
    const double wz = geom.waist_m * std::sqrt(2.0);
    for (int n : {0, 3}) {
        const double x = 0.4 * wz;
        CHECK(mode_intensity(TransverseMode::hg(n), geom, x, 0.0, zr)
              == doctest::Approx(hg_intensity_reference(n, wz, x, 0.0)).epsilon(1e-10));
    }
}

TEST_CASE("Hermite functions are orthonormal")
{
    const auto rule = quadrature::gauss_hermite(60);
    for (int a = 0; a < 8; ++a) {
        for (int b = 0; b < 8; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double x = rule.nodes[i];
                s += rule.weights[i] * std::exp(x * x) * hermite_function(a, x) * hermite_function(b, x);
            }
            CHECK(s == doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("Laguerre recurrence agrees with the standard library")
{
    for (int p = 0; p <= 40; ++p)
        for (double x : {0.0, 0.3, 2.5, 11.0, 60.0})
            CHECK(laguerre(p, x) == doctest::Approx(std::laguerre(p, x)).epsilon(1e-9).scale(1e-9));
}

TEST_CASE("quadrature rules integrate polynomials exactly")
{
    const auto gh = quadrature::gauss_hermite(10);
    // int x^{2k} exp(-x^2) = Gamma(k + 1/2)
    for (int k = 0; k < 10; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < gh.nodes.size(); ++i)
            s += gh.weights[i] * std::pow(gh.nodes[i], 2 * k);
        CHECK(s == doctest::Approx(std::tgamma(k + 0.5)).epsilon(1e-11));
    }
    const auto gl = quadrature::gauss_laguerre(10);
    for (int k = 0; k < 20; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i)
            s += gl.weights[i] * std::pow(gl.nodes[i], k);
        CHECK(s == doctest::Approx(factorial(k)).epsilon(1e-9));
    }
}

TEST_CASE("HG intensity maxima agree with a dense grid scan")
{
    const auto geom = readout_cavity();
    for (int n : {0, 1, 4, 9, 24}) {
        const auto maxima = hg_intensity_maxima(n, geom);
        REQUIRE(maxima.size() == static_cast<std::size_t>(n + 1));
        // Brute force: local maxima of the 1-D profile on a fine grid.
        const double span = 2.0 * std::sqrt(2.0 * n + 1.0) * geom.waist_m;
        const int steps = 400000;
        std::vector<double> found;
        auto f = [&](double x) { return hg_intensity_reference(n, geom.waist_m, x, 0.0); };
        const double dx = 2.0 * span / steps;
        for (int i = 1; i < steps; ++i) {
            const double x = -span + i * dx;
            if (f(x) > f(x - dx) && f(x) >= f(x + dx))
                found.push_back(x);
        }
        REQUIRE(found.size() == maxima.size());
        for (std::size_t i = 0; i < found.size(); ++i)
            CHECK(maxima[i] == doctest::Approx(found[i]).scale(geom.waist_m).epsilon(2.0 * dx / geom.waist_m));
    }
}

TEST_CASE("LG peak factor is one for every radial order")
{
    const auto geom = link_cavity();
    for (int p = 0; p <= 40; ++p)
        CHECK(std::abs(mode_peak_factor(TransverseMode::lg(p), geom) - 1.0) < 1e-12);
}

TEST_CASE("HG peak factor falls with order")
{
    const auto geom = readout_cavity();
    double prev = 2.0;
    for (int n = 0; n < 25; ++n) {
        const double f = mode_peak_factor(TransverseMode::hg(n), geom);
        CHECK(f < prev);
        CHECK(f > 0.0);
        prev = f;
    }
}

TEST_CASE("mode offsets fold the Gouy phase into one free spectral range")
{
    const auto geom = readout_cavity();
    const auto p = derived_params(geom);
    const auto spectrum = mode_offsets(geom, ModeFamily::HermiteGauss, 24);
    REQUIRE(spectrum.entries.size() == 25);
    for (const auto& e : spectrum.entries) {
        const double raw = e.mode.index_a * p.gouy_per_order_rad / kPi * p.fsr_hz;
        const double folded = raw - std::floor(raw / p.fsr_hz) * p.fsr_hz;
        CHECK(e.offset_hz == doctest::Approx(folded).scale(p.fsr_hz).epsilon(1e-12));
        CHECK(e.offset_hz >= 0.0);
        CHECK(e.offset_hz < p.fsr_hz);
    }
    // LG_{p,0} has twice the Gouy phase of HG_{n,0} at the same index.
    const auto lg = mode_offsets(geom, ModeFamily::LaguerreGauss, 3);
    const auto hg = mode_offsets(geom, ModeFamily::HermiteGauss, 6);
    CHECK(lg.entries[3].offset_hz == doctest::Approx(hg.entries[6].offset_hz).epsilon(1e-12));
}

TEST_CASE("tuning produces an equally spaced grid")
{
    const auto hg = tune_for_equal_spacing(readout_cavity(), ModeFamily::HermiteGauss, 25);
    const auto s1 = mode_offsets(hg, ModeFamily::HermiteGauss, 24);
    CHECK(s1.equally_spaced);
    CHECK(s1.grid_residual_hz < 1.0);
    CHECK(s1.spacing_hz == doctest::Approx(s1.fsr_hz / 25.0));
    // Every grid slot is filled exactly once.
    auto sorted = s1.sorted_by_offset();
    for (std::size_t i = 0; i < sorted.size(); ++i)
        CHECK(sorted[i].offset_hz == doctest::Approx(i * s1.spacing_hz).scale(s1.fsr_hz).epsilon(1e-9));

    const auto lg = tune_for_equal_spacing(link_cavity(), ModeFamily::LaguerreGauss, 33);
    const auto s2 = mode_offsets(lg, ModeFamily::LaguerreGauss, 32);
    CHECK(s2.equally_spaced);
    CHECK(std::abs(lg.waist_m - 8.6e-6) / 8.6e-6 < 0.01);
}

TEST_CASE("degenerate single-mode spectrum has one line at zero")
{
    const auto s = mode_offsets(readout_cavity(), ModeFamily::HermiteGauss, 0);
    REQUIRE(s.entries.size() == 1);
    CHECK(s.entries[0].offset_hz == 0.0);
}

TEST_CASE("peak cooperativity follows 24 F / (pi k^2 w0^2)")
{
    const auto geom = readout_cavity();
    const double k = kTwoPi / geom.wavelength_m;
    CHECK(peak_cooperativity(geom) == doctest::Approx(24.0 * 6e4 / (kPi * k * k * 20e-6 * 20e-6)).epsilon(1e-12));
}

TEST_CASE("invalid geometry is rejected")
{
    CHECK_THROWS_AS(CavityGeometry::from_losses(-1.0, 20e-6, 780e-9, 6e4, 0.0).validate(), ValidationError);
    CHECK_THROWS_AS(CavityGeometry::from_losses(1e-2, 20e-6, 780e-9, 0.0, 0.0).validate(), ValidationError);
    CHECK_THROWS_AS(TransverseMode::hg(-1).validate(), ValidationError);
    CHECK_THROWS_AS(parse_family("bessel"), ValidationError);
}
