#include "cmm/dressing.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cmm::dressing {

void LevelScheme::validate() const
{
    require(gamma_e_rad_s > 0.0, "gamma_e must be positive");
    require(gamma_f_rad_s >= 0.0, "gamma_f must be non-negative");
    static const std::set<std::string> destinations{"g", "q0", "q1", "sink"};
    double total = 0.0;
    for (const auto& [dest, p] : branching) {
        require(destinations.count(dest) == 1, "unknown decay destination '" + dest + "'");
        require(p >= 0.0 && p <= 1.0, "branching probability for '" + dest + "' outside [0, 1]");
        total += p;
    }
    require(std::abs(total - 1.0) < 1e-9, "e_plus branching probabilities must sum to 1");
    require(cavity_branching > 0.0 && cavity_branching <= 1.0, "cavity branching must lie in (0, 1]");
    require(leak_probability >= 0.0 && leak_probability < 0.05,
            "leak probability must lie in [0, 0.05)");
}

void DressingField::validate() const
{
    require(rabi_rad_s >= 0.0, "control Rabi frequency must be non-negative");
    require(std::isfinite(detuning_rad_s), "control detuning must be finite");
    require(intensity_stability >= 0.0, "intensity stability must be non-negative");
}

double DressedState::cooperativity_factor(double gamma_e_rad_s) const
{
    return coupling_scale * coupling_scale * gamma_e_rad_s / linewidth_rad_s;
}

DressedState dress(const DressingField& field, const LevelScheme& scheme)
{
    field.validate();
    DressedState state;
    const double omega = field.rabi_rad_s;
    const double delta = field.detuning_rad_s;
    if (omega == 0.0) {
        state.shift_plus_rad_s = 0.0;
        state.shift_minus_rad_s = delta;
        state.coupling_scale = 1.0;
        state.linewidth_rad_s = scheme.gamma_e_rad_s;
        return state;
    }
    // (e, f) block with f at +delta and control coupling -omega/2; e_plus is the
    // lower branch, (e + f)/sqrt(2) at zero detuning.
    const double root = std::hypot(delta, omega);
    state.shift_plus_rad_s = 0.5 * (delta - root);
    state.shift_minus_rad_s = 0.5 * (delta + root);
    const double ratio = 2.0 * state.shift_plus_rad_s / omega;   // c_f / c_e up to sign
    const double weight_e = 1.0 / (1.0 + ratio * ratio);
    state.coupling_scale = std::sqrt(weight_e);
    state.linewidth_rad_s = weight_e * scheme.gamma_e_rad_s + (1.0 - weight_e) * scheme.gamma_f_rad_s;
    return state;
}

double shift_jitter_hz(const DressingField& field)
{
    field.validate();
    require(field.detuning_rad_s == 0.0, "shift jitter model assumes resonant control light");
    const double shift_hz = rad_to_hz(0.5 * field.rabi_rad_s);
    return shift_hz * 0.5 * field.intensity_stability;
}

std::vector<ModeSlot> assign_modes(const optics::ModeSpectrum& spectrum, double max_shift_hz,
                                   int n_fsr, double exclusion_band_hz)
{
    require(!spectrum.entries.empty(), "spectrum has no modes");
    require(n_fsr >= 1, "at least one longitudinal copy is required");
    require(max_shift_hz >= 0.0 && exclusion_band_hz >= 0.0, "shifts must be non-negative");

    const double slack = 1e-9 * std::max(1.0, max_shift_hz);
    std::vector<ModeSlot> slots;
    for (int copy = 0; copy < n_fsr; ++copy) {
        for (const auto& entry : spectrum.entries) {
            const double shift = entry.offset_hz + copy * spectrum.fsr_hz;
            if (shift > max_shift_hz + slack)
                continue;
            if (exclusion_band_hz > 0.0 && shift <= exclusion_band_hz)
                continue;
            slots.push_back({entry.mode, copy, shift});
        }
    }
    std::stable_sort(slots.begin(), slots.end(),
                     [](const ModeSlot& a, const ModeSlot& b) { return a.shift_hz < b.shift_hz; });
    return slots;
}

ReadoutYield fluorescence_readout(const ProbeDrive& probe, double eta, const DressedState& dressed,
                                  double duration_s, double kappa_e_fraction)
{
    require(duration_s >= 0.0, "readout duration must be non-negative");
    require(eta >= 0.0, "cooperativity must be non-negative");
    require(kappa_e_fraction >= 0.0 && kappa_e_fraction <= 1.0, "kappa_e fraction outside [0, 1]");

    const double gamma = dressed.linewidth_rad_s;
    const double gamma_total = gamma * (1.0 + eta);
    const double omega2 = probe.rabi_rad_s * probe.rabi_rad_s;
    const double delta = probe.detuning_rad_s;
    const double rho_ee = 0.25 * omega2 / (delta * delta + 0.25 * gamma_total * gamma_total + 0.5 * omega2);

    ReadoutYield yield;
    yield.photons_into_cavity = eta * gamma * rho_ee * duration_s;
    yield.collected = yield.photons_into_cavity * kappa_e_fraction;
    yield.collection_efficiency = eta / (1.0 + eta) * kappa_e_fraction;
    return yield;
}

double probe_crosstalk(double mode_spacing_hz, double linewidth_hz, double probe_suppression)
{
    require(mode_spacing_hz > 0.0, "mode spacing must be positive");
    require(probe_suppression >= 0.0 && probe_suppression <= 1.0, "probe suppression outside [0, 1]");
    if (std::isinf(mode_spacing_hz))
        return 0.0;
    const double tail = linewidth_hz / (2.0 * mode_spacing_hz);
    return tail * tail * probe_suppression;
}

} // namespace cmm::dressing
