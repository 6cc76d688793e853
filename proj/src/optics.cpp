#include "cmm/optics.hpp"

#include "cmm/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cmm::optics {

double CavityGeometry::rayleigh_range() const
{
    return kPi * waist_m * waist_m / wavelength_m;
}

void CavityGeometry::validate() const
{
    require(std::isfinite(length_m) && length_m > 0.0, "cavity length must be positive");
    require(std::isfinite(waist_m) && waist_m > 0.0, "cavity waist must be positive");
    require(std::isfinite(wavelength_m) && wavelength_m > 0.0, "wavelength must be positive");
    require(std::isfinite(finesse) && finesse > 1.0, "finesse must exceed 1");
    require(mirror_loss_total >= 0.0, "mirror loss must be non-negative");
    require(output_coupling_fraction >= 0.0 && output_coupling_fraction <= 1.0,
            "output coupling fraction must lie in [0, 1]");
    require(symmetric, "only symmetric two-mirror cavities are supported");
    require(rayleigh_range() < 0.5 * length_m,
            "degenerate geometry: Rayleigh range must be shorter than half the cavity length");
}

CavityGeometry CavityGeometry::from_losses(double length_m, double waist_m, double wavelength_m,
                                           double finesse, double mirror_loss_total)
{
    CavityGeometry g;
    g.length_m = length_m;
    g.waist_m = waist_m;
    g.wavelength_m = wavelength_m;
    g.finesse = finesse;
    g.mirror_loss_total = mirror_loss_total;
    const double round_trip_loss = kTwoPi / finesse;
    require(mirror_loss_total <= round_trip_loss,
            "intrinsic mirror loss exceeds the total round-trip loss implied by the finesse");
    g.output_coupling_fraction = 1.0 - mirror_loss_total / round_trip_loss;
    return g;
}

double DerivedParams::fold_ratio() const
{
    return gouy_per_order_rad / kPi;
}

DerivedParams derived_params(const CavityGeometry& geom)
{
    geom.validate();
    DerivedParams p;
    p.fsr_hz = kSpeedOfLight / (2.0 * geom.length_m);
    p.linewidth_hz = p.fsr_hz / geom.finesse;
    const double kappa = hz_to_rad(p.linewidth_hz);
    p.kappa_e_rad_s = geom.output_coupling_fraction * kappa;
    p.kappa_i_rad_s = kappa - p.kappa_e_rad_s;
    p.rayleigh_range_m = geom.rayleigh_range();
    p.gouy_per_order_rad = 2.0 * std::atan(0.5 * geom.length_m / p.rayleigh_range_m);
    return p;
}

std::string to_string(ModeFamily family)
{
    return family == ModeFamily::HermiteGauss ? "HG" : "LG";
}

ModeFamily parse_family(const std::string& text)
{
    if (text == "HG" || text == "hg")
        return ModeFamily::HermiteGauss;
    if (text == "LG" || text == "lg")
        return ModeFamily::LaguerreGauss;
    throw ValidationError("unknown mode family '" + text + "' (expected HG or LG)");
}

int TransverseMode::order() const
{
    return family == ModeFamily::HermiteGauss ? index_a + index_b
                                              : 2 * index_a + std::abs(index_b);
}

void TransverseMode::validate() const
{
    require(index_a >= 0, "mode index must be non-negative");
    require(index_b == 0, "only (n,0) Hermite-Gauss and (p,0) Laguerre-Gauss modes are supported");
}

std::string TransverseMode::label() const
{
    return to_string(family) + "_" + std::to_string(index_a) + "," + std::to_string(index_b);
}

std::vector<SpectrumEntry> ModeSpectrum::sorted_by_offset() const
{
    auto sorted = entries;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.offset_hz < b.offset_hz; });
    return sorted;
}

namespace {

int order_step(ModeFamily family)
{
    return family == ModeFamily::HermiteGauss ? 1 : 2;
}

// Fractional part in [0, 1); values within rounding of 1 fold to 0.
double fold(double value)
{
    double f = value - std::floor(value);
    if (f > 1.0 - 1e-12)
        f = 0.0;
    return f;
}

} // namespace

ModeSpectrum mode_offsets(const CavityGeometry& geom, ModeFamily family, int max_index,
                          double grid_tolerance_hz)
{
    require(max_index >= 0, "max mode index must be non-negative");
    const auto params = derived_params(geom);
    const double ratio = params.fold_ratio();

    ModeSpectrum spectrum;
    spectrum.fsr_hz = params.fsr_hz;
    const int n_modes = max_index + 1;
    spectrum.spacing_hz = params.fsr_hz / n_modes;
    spectrum.entries.reserve(n_modes);
    for (int i = 0; i <= max_index; ++i) {
        const TransverseMode mode{family, i, 0};
        spectrum.entries.push_back({mode, 0, fold(mode.order() * ratio) * params.fsr_hz});
    }

    const auto sorted = spectrum.sorted_by_offset();
    double residual = 0.0;
    for (int k = 0; k < n_modes; ++k) {
        double d = std::abs(sorted[k].offset_hz - k * spectrum.spacing_hz);
        d = std::min(d, params.fsr_hz - d);
        residual = std::max(residual, d);
    }
    spectrum.grid_residual_hz = residual;
    spectrum.equally_spaced = residual < grid_tolerance_hz;
    return spectrum;
}

CavityGeometry tune_for_equal_spacing(const CavityGeometry& geom, ModeFamily family, int n_modes)
{
    require(n_modes >= 1, "number of modes must be positive");
    const auto params = derived_params(geom);
    if (n_modes == 1)
        return geom;

    const int step = order_step(family);
    const double natural = step * params.fold_ratio();
    const double whole = std::floor(natural);
    const double frac = natural - whole;
    const long nearest = std::lround(frac * n_modes);

    long numerator = -1;
    for (long delta = 0; delta < n_modes && numerator < 0; ++delta) {
        for (long candidate : {nearest - delta, nearest + delta}) {
            if (candidate >= 1 && candidate < n_modes && std::gcd(candidate, long{n_modes}) == 1) {
                numerator = candidate;
                break;
            }
        }
    }
    if (numerator < 0)
        throw ValidationError("no coprime fold ratio exists for the requested mode count");

    const double tuned_psi = kPi * (whole + static_cast<double>(numerator) / n_modes) / step;
    require(tuned_psi > 0.0 && tuned_psi < kPi, "tuned Gouy phase outside (0, pi)");
    const double tuned_zr = 0.5 * geom.length_m / std::tan(0.5 * tuned_psi);

    CavityGeometry tuned = geom;
    tuned.waist_m = std::sqrt(tuned_zr * geom.wavelength_m / kPi);
    tuned.validate();
    return tuned;
}

double peak_cooperativity(const CavityGeometry& geom)
{
    geom.validate();
    const double k = kTwoPi / geom.wavelength_m;
    return 24.0 * geom.finesse / (kPi * k * k * geom.waist_m * geom.waist_m);
}

double hermite_function(int n, double s)
{
    double prev = 0.0;
    double cur = std::exp(-0.5 * s * s) / std::pow(kPi, 0.25);
    for (int k = 0; k < n; ++k) {
        const double next = std::sqrt(2.0 / (k + 1)) * s * cur - std::sqrt(double(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double laguerre(int p, double x)
{
    if (p == 0)
        return 1.0;
    double prev = 1.0;
    double cur = 1.0 - x;
    for (int k = 1; k < p; ++k) {
        const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

std::complex<double> mode_amplitude(const TransverseMode& mode, const CavityGeometry& geom,
                                    double x, double y, double z)
{
    mode.validate();
    const double zr = geom.rayleigh_range();
    const double k = kTwoPi / geom.wavelength_m;
    const double w = geom.waist_m * std::sqrt(1.0 + (z / zr) * (z / zr));
    const double r2 = x * x + y * y;
    const double inv_radius = z / (z * z + zr * zr);   // 1/R(z), zero at the waist
    const double gouy = std::atan(z / zr);

    double envelope = 0.0;
    if (mode.family == ModeFamily::HermiteGauss) {
        const double norm = std::sqrt(2.0) / w;   // (2^{1/4}/sqrt(w))^2
        envelope = norm * hermite_function(mode.index_a, std::sqrt(2.0) * x / w)
                 * hermite_function(0, std::sqrt(2.0) * y / w);
    } else {
        envelope = std::sqrt(2.0 / kPi) / w * laguerre(mode.index_a, 2.0 * r2 / (w * w))
                 * std::exp(-r2 / (w * w));
    }
    const double phase = -0.5 * k * r2 * inv_radius + (mode.order() + 1) * gouy;
    return std::polar(envelope, phase);
}

double mode_intensity(const TransverseMode& mode, const CavityGeometry& geom,
                      double x, double y, double z)
{
    return std::norm(mode_amplitude(mode, geom, x, y, z));
}

namespace {

// d psi_n / ds
double hermite_function_derivative(int n, double s)
{
    const double lower = n > 0 ? std::sqrt(n / 2.0) * hermite_function(n - 1, s) : 0.0;
    return lower - std::sqrt((n + 1) / 2.0) * hermite_function(n + 1, s);
}

// Positive-s maxima of psi_n^2 in dimensionless units.
std::vector<double> positive_lobe_maxima(int n)
{
    const double s_max = std::sqrt(2.0 * n + 1.0) + 3.0;
    const int samples = 2000 + 400 * n;
    const double ds = s_max / samples;

    std::vector<double> roots;
    double a = 1e-9;
    double fa = hermite_function_derivative(n, a);
    for (int i = 1; i <= samples; ++i) {
        const double b = i * ds;
        const double fb = hermite_function_derivative(n, b);
        if ((fa > 0.0 && fb <= 0.0) || (fa < 0.0 && fb >= 0.0)) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = hermite_function_derivative(n, mid);
                if ((flo > 0.0) == (fm > 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    return roots;
}

} // namespace

std::vector<double> hg_intensity_maxima(int n, const CavityGeometry& geom)
{
    require(n >= 0, "HG index must be non-negative");
    const double scale = geom.waist_m / std::sqrt(2.0);
    const auto positive = positive_lobe_maxima(n);

    std::vector<double> xs;
    xs.reserve(n + 1);
    for (auto it = positive.rbegin(); it != positive.rend(); ++it)
        xs.push_back(-*it * scale);
    if (n % 2 == 0)
        xs.push_back(0.0);
    for (double s : positive)
        xs.push_back(s * scale);
    if (static_cast<int>(xs.size()) != n + 1)
        throw NumericalError("failed to resolve all HG intensity maxima for n = " + std::to_string(n));
    return xs;
}

double mode_peak_factor(const TransverseMode& mode, const CavityGeometry& geom)
{
    mode.validate();
    if (mode.family == ModeFamily::LaguerreGauss) {
        const double l0 = laguerre(mode.index_a, 0.0);
        return l0 * l0;
    }
    const double reference = hermite_function(0, 0.0) * hermite_function(0, 0.0);
    double best = 0.0;
    for (double x : hg_intensity_maxima(mode.index_a, geom)) {
        const double psi = hermite_function(mode.index_a, std::sqrt(2.0) * x / geom.waist_m);
        best = std::max(best, psi * psi / reference);
    }
    return best;
}

} // namespace cmm::optics
