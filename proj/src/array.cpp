#include "cmm/array.hpp"

#include "cmm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

namespace cmm::array {

std::string to_string(Design design)
{
    return design == Design::HgReadout ? "hg_readout" : "lg_chain";
}

Design parse_design(const std::string& text)
{
    if (text == "hg_readout")
        return Design::HgReadout;
    if (text == "lg_chain")
        return Design::LgChain;
    throw ValidationError("unknown design '" + text + "' (expected hg_readout or lg_chain)");
}

int ArrayLayout::register_count() const
{
    int count = 0;
    for (const auto& site : sites)
        count = std::max(count, site.register_id + 1);
    return count;
}

ArrayLayout build_hg_layout(const optics::CavityGeometry& geom, const HgLayoutOptions& options)
{
    require(options.n_transverse >= 1, "need at least one transverse mode");
    require(options.atoms_per_column >= 1, "need at least one atom per column");
    require(options.registers_per_column >= 1, "need at least one register per column");
    require(options.atoms_per_column % options.registers_per_column == 0,
            "atoms per column must divide evenly into registers");
    require(options.spacing_z_m > 0.0, "axial spacing must be positive");
    require(options.spacing_z_m * options.atoms_per_column <= geom.length_m,
            "column extent exceeds the cavity length");

    const auto spectrum = optics::mode_offsets(geom, optics::ModeFamily::HermiteGauss,
                                               options.n_transverse - 1);
    ArrayLayout layout;
    layout.design = Design::HgReadout;
    layout.geometry = geom;
    layout.min_spacing_m = options.min_spacing_m;

    const int per_register = options.atoms_per_column / options.registers_per_column;
    const double z_center = 0.5 * (options.atoms_per_column - 1);
    std::vector<double> column_x;
    for (int n = 0; n < options.n_transverse; ++n) {
        const auto maxima = optics::hg_intensity_maxima(n, geom);
        const double x = (n % 2 == 1) ? maxima.back() : maxima.front();
        column_x.push_back(n == 0 ? 0.0 : x);

        for (int r = 0; r < options.registers_per_column; ++r) {
            const int slot_id = static_cast<int>(layout.modes.size());
            const double shift = spectrum.entries[n].offset_hz + r * spectrum.fsr_hz;
            layout.modes.push_back({optics::TransverseMode::hg(n), r, shift});
            for (int i = r * per_register; i < (r + 1) * per_register; ++i) {
                AtomSite site;
                site.x = column_x.back();
                site.z = (i - z_center) * options.spacing_z_m;
                site.register_id = slot_id;
                site.mode_id = slot_id;
                site.applied_shift_hz = shift;
                layout.sites.push_back(site);
            }
        }
    }

    const double eps = 1e-12;
    require(options.atoms_per_column == 1 || options.spacing_z_m >= options.min_spacing_m - eps,
            "axial spacing below the minimum site spacing");
    std::sort(column_x.begin(), column_x.end());
    for (std::size_t i = 1; i < column_x.size(); ++i) {
        const double gap = column_x[i] - column_x[i - 1];
        if (gap < options.min_spacing_m - eps)
            throw ValidationError("column overlap: adjacent columns are " + std::to_string(gap * 1e6)
                                  + " um apart, below the minimum spacing");
    }
    return layout;
}

ArrayLayout build_lg_chain(const optics::CavityGeometry& geom,
                           const std::vector<dressing::ModeSlot>& modes,
                           const LgChainOptions& options)
{
    require(options.n_atoms >= 1 && options.n_registers >= 1, "atom and register counts must be positive");
    require(options.n_atoms % options.n_registers == 0, "atom count must be divisible by register count");
    require(static_cast<int>(modes.size()) >= options.n_registers,
            "fewer usable modes than registers");
    require(options.spacing_z_m >= options.min_spacing_m - 1e-12 || options.n_atoms == 1,
            "axial spacing below the minimum site spacing");

    ArrayLayout layout;
    layout.design = Design::LgChain;
    layout.geometry = geom;
    layout.min_spacing_m = options.min_spacing_m;
    layout.modes.assign(modes.begin(), modes.begin() + options.n_registers);

    const int per_register = options.n_atoms / options.n_registers;
    const double center = 0.5 * (options.n_atoms - 1);
    for (int i = 0; i < options.n_atoms; ++i) {
        AtomSite site;
        site.z = (i - center) * options.spacing_z_m;
        site.register_id = i / per_register;
        site.mode_id = site.register_id;
        site.applied_shift_hz = layout.modes[site.mode_id].shift_hz;
        layout.sites.push_back(site);
    }

    const double span = (options.n_atoms - 1) * options.spacing_z_m;
    const double zr = geom.rayleigh_range();
    if (span > 1.2 * 2.0 * zr)
        layout.warnings.push_back("chain span exceeds two Rayleigh ranges by more than 20%");
    return layout;
}

double ThermalState::position_rms() const
{
    if (temperature_k == 0.0)
        return 0.0;
    return std::sqrt(kBoltzmann * temperature_k / (mass_kg * trap_frequency_rad_s * trap_frequency_rad_s));
}

void ThermalState::validate() const
{
    require(temperature_k >= 0.0, "temperature must be non-negative");
    require(trap_frequency_rad_s > 0.0, "trap frequency must be positive");
    require(mass_kg > 0.0, "atomic mass must be positive");
}

namespace {

// <psi_n(s0 + beta*delta)^2> / psi_n(s0)^2 for delta ~ N(0, sigma^2). The
// Gaussian factor of psi_n^2 is folded into the weight so a Gauss-Hermite rule
// with n+1 nodes integrates the remaining polynomial exactly.
double hermite_gaussian_average(int n, double s0, double beta, double sigma)
{
    if (sigma == 0.0)
        return 1.0;
    auto poly = [n](double s) {
        const double v = optics::hermite_function(n, s) * std::exp(0.5 * s * s);
        return v * v;
    };
    const double a = beta * beta + 1.0 / (2.0 * sigma * sigma);
    const double shift = s0 * beta / a;
    const auto rule = quadrature::gauss_hermite(n + 2);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double delta = rule.nodes[i] / std::sqrt(a) - shift;
        sum += rule.weights[i] * poly(s0 + beta * delta);
    }
    const double prefactor = std::exp(s0 * s0 * beta * beta / a) / std::sqrt(2.0 * kPi * sigma * sigma * a);
    return prefactor * sum / poly(s0);
}

// On-axis LG_{p,0}: int exp(-(1+a)t) L_p(a t)^2 dt with a = 4 sigma^2 / w0^2.
// After rescaling the integrand is polynomial times exp(-u), exact with p+1 nodes.
double laguerre_gaussian_average(int p, double sigma, double waist)
{
    if (sigma == 0.0)
        return 1.0;
    const double a = 4.0 * sigma * sigma / (waist * waist);
    const auto rule = quadrature::gauss_laguerre(p + 2);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double l = optics::laguerre(p, a * rule.nodes[i] / (1.0 + a));
        sum += rule.weights[i] * l * l;
    }
    return sum / (1.0 + a);
}

} // namespace

double thermal_reduction_at(const optics::TransverseMode& mode, const ThermalState& thermal,
                            const optics::CavityGeometry& geom, double x0, double y0)
{
    mode.validate();
    thermal.validate();
    const double sigma = thermal.position_rms();
    const double w0 = geom.waist_m;
    if (mode.family == optics::ModeFamily::LaguerreGauss) {
        require(x0 == 0.0 && y0 == 0.0, "thermal averaging of LG modes is only supported on axis");
        return laguerre_gaussian_average(mode.index_a, sigma, w0);
    }
    const double beta = std::sqrt(2.0) / w0;
    return hermite_gaussian_average(mode.index_a, beta * x0, beta, sigma)
         * hermite_gaussian_average(0, beta * y0, beta, sigma);
}

double thermal_reduction(const optics::TransverseMode& mode, const ThermalState& thermal,
                         const optics::CavityGeometry& geom)
{
    if (mode.family == optics::ModeFamily::LaguerreGauss)
        return thermal_reduction_at(mode, thermal, geom, 0.0, 0.0);
    const auto maxima = optics::hg_intensity_maxima(mode.index_a, geom);
    return thermal_reduction_at(mode, thermal, geom, maxima.back(), 0.0);
}

CooperativityMap summarize(std::vector<double> eta)
{
    CooperativityMap map;
    map.eta = std::move(eta);
    if (map.eta.empty())
        return map;
    const double n = static_cast<double>(map.eta.size());
    map.mean = std::accumulate(map.eta.begin(), map.eta.end(), 0.0) / n;
    double var = 0.0;
    for (double v : map.eta)
        var += (v - map.mean) * (v - map.mean);
    map.std = std::sqrt(var / n);
    const auto [lo, hi] = std::minmax_element(map.eta.begin(), map.eta.end());
    map.min = *lo;
    map.max = *hi;
    return map;
}

namespace {

double axial_envelope(double z, double zr)
{
    return 1.0 / (1.0 + (z / zr) * (z / zr));
}

double intensity_ratio(const optics::TransverseMode& mode, const optics::CavityGeometry& geom,
                       double x, double y)
{
    const double reference = optics::mode_intensity(optics::TransverseMode::hg(0), geom, 0.0, 0.0, 0.0);
    return optics::mode_intensity(mode, geom, x, y, 0.0) / reference;
}

} // namespace

CooperativityMap cooperativity_map(const ArrayLayout& layout, const dressing::LevelScheme& scheme,
                                   const dressing::DressedState& dressed, const ThermalState& thermal)
{
    scheme.validate();
    const auto& geom = layout.geometry;
    const double eta0 = optics::peak_cooperativity(geom);
    const double zr = geom.rayleigh_range();
    const double common = eta0 * dressed.cooperativity_factor(scheme.gamma_e_rad_s) * scheme.cavity_branching;

    // Sites of one register share (x, y) and mode, so transverse factors are cached.
    std::map<std::tuple<int, double, double>, double> transverse;
    std::vector<double> eta;
    eta.reserve(layout.sites.size());
    for (const auto& site : layout.sites) {
        require(site.mode_id >= 0 && site.mode_id < static_cast<int>(layout.modes.size()),
                "site references an unknown mode");
        const auto key = std::make_tuple(site.mode_id, site.x, site.y);
        auto it = transverse.find(key);
        if (it == transverse.end()) {
            const auto& mode = layout.modes[site.mode_id].mode;
            const double factor = intensity_ratio(mode, geom, site.x, site.y)
                                * thermal_reduction_at(mode, thermal, geom, site.x, site.y);
            it = transverse.emplace(key, factor).first;
        }
        eta.push_back(common * it->second * axial_envelope(site.z, zr));
    }
    return summarize(std::move(eta));
}

double residual_shift_hz(double distance_m, double beam_waist_m, double applied_shift_hz)
{
    require(beam_waist_m > 0.0, "control beam waist must be positive");
    // Shift follows the Rabi frequency, i.e. the field amplitude exp(-d^2/w^2).
    return applied_shift_hz * std::exp(-distance_m * distance_m / (beam_waist_m * beam_waist_m));
}

CrosstalkMap control_crosstalk_map(const ArrayLayout& layout, double beam_waist_m, double applied_shift_hz)
{
    require(layout.design == Design::LgChain, "control crosstalk map is defined for the 1-D chain");
    CrosstalkMap map;
    const auto& sites = layout.sites;
    map.residual_shift_hz.assign(sites.size(), 0.0);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        for (std::size_t j = 0; j < sites.size(); ++j) {
            if (i == j)
                continue;
            const double d = std::hypot(sites[i].x - sites[j].x, sites[i].y - sites[j].y, sites[i].z - sites[j].z);
            map.residual_shift_hz[i] = std::max(map.residual_shift_hz[i],
                                                residual_shift_hz(d, beam_waist_m, applied_shift_hz));
        }
    }
    if (!sites.empty())
        map.exclusion_band_hz = *std::max_element(map.residual_shift_hz.begin(), map.residual_shift_hz.end());
    return map;
}

double dispersive_shift_rad_s(double eta, double kappa_rad_s, double gamma_rad_s, double detuning_rad_s)
{
    require(detuning_rad_s != 0.0, "dispersive shift needs a non-zero detuning");
    const double g2 = eta * kappa_rad_s * gamma_rad_s / 4.0;
    return g2 / detuning_rad_s;
}

DispersiveLoad dispersive_load(int mode_id, const ArrayLayout& layout, const dressing::LevelScheme& scheme,
                               const dressing::DressedState& dressed, double p_synd)
{
    require(mode_id >= 0 && mode_id < static_cast<int>(layout.modes.size()), "unknown mode id");
    require(p_synd >= 0.0 && p_synd <= 1.0, "p_synd outside [0, 1]");
    const auto& geom = layout.geometry;
    const auto params = optics::derived_params(geom);
    const auto& target = layout.modes[mode_id];
    const double eta0 = optics::peak_cooperativity(geom);
    const double zr = geom.rayleigh_range();
    const double common = eta0 * dressed.cooperativity_factor(scheme.gamma_e_rad_s) * scheme.cavity_branching;

    DispersiveLoad load;
    load.bound_hz = 0.1 * params.linewidth_hz;
    if (p_synd == 0.0)
        return load;
    std::map<std::pair<double, double>, double> overlap;
    for (const auto& site : layout.sites) {
        if (site.mode_id == mode_id)
            continue;
        const double detuning = hz_to_rad(site.applied_shift_hz - target.shift_hz);
        if (detuning == 0.0)
            continue;
        auto it = overlap.find({site.x, site.y});
        if (it == overlap.end())
            it = overlap.emplace(std::make_pair(site.x, site.y),
                                 intensity_ratio(target.mode, geom, site.x, site.y)).first;
        const double eta = common * it->second * axial_envelope(site.z, zr);
        const double pull = rad_to_hz(p_synd * dispersive_shift_rad_s(eta, params.kappa_rad_s(),
                                                                      dressed.linewidth_rad_s, detuning));
        load.pull_hz += pull;
        load.pull_abs_hz += std::abs(pull);
        ++load.contributors;
    }
    return load;
}

} // namespace cmm::array
