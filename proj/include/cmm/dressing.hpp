#pragma once

#include "cmm/common.hpp"
#include "cmm/optics.hpp"

#include <map>
#include <string>
#include <vector>

namespace cmm::dressing {

/// Ground g, bare excited e, upper excited f, qubit states q0/q1.
/// The dressed level e_plus decays according to `branching`.
struct LevelScheme {
    std::string qubit0 = "q0";
    std::string qubit1 = "q1";
    std::string ground = "g";
    std::string excited = "e";
    std::string upper = "f";

    double gamma_e_rad_s = hz_to_rad(6.0e6);
    double gamma_f_rad_s = hz_to_rad(1.9e6);

    /// Spontaneous-decay destinations of e_plus: any of g, q0, q1, sink.
    std::map<std::string, double> branching{{"q1", 1.0}};
    /// Fraction of the e_plus transition strength on the cavity-coupled
    /// transition(s); multiplies the cooperativity.
    double cavity_branching = 1.0;
    /// Decays that put a photon in the cavity but leave the atom outside the qubit basis.
    double leak_probability = 0.0;

    void validate() const;
};

struct DressingField {
    double rabi_rad_s = 0.0;
    double detuning_rad_s = 0.0;
    double intensity_stability = 1e-3;   // fractional RMS

    void validate() const;
};

/// Shifts are relative to the bare g -> e transition.
struct DressedState {
    double shift_plus_rad_s = 0.0;
    double shift_minus_rad_s = 0.0;
    /// |<e|e_plus>|, the amplitude reduction of the cavity coupling.
    double coupling_scale = 1.0;
    double linewidth_rad_s = 0.0;

    /// eta_dressed / eta_bare = coupling_scale^2 * gamma_e / linewidth.
    double cooperativity_factor(double gamma_e_rad_s) const;
};

DressedState dress(const DressingField& field, const LevelScheme& scheme);

/// RMS transition-frequency jitter (Hz) from control-intensity noise at zero
/// control detuning. The shift scales as sqrt(intensity).
double shift_jitter_hz(const DressingField& field);

/// A usable cavity resonance: transverse mode, longitudinal copy and the light
/// shift needed to bring the atom onto it.
struct ModeSlot {
    optics::TransverseMode mode;
    int longitudinal = 0;
    double shift_hz = 0.0;
};

/// Modes reachable with shifts <= max_shift across n_fsr longitudinal copies,
/// excluding those within `exclusion_band_hz` of zero shift. Sorted by shift.
std::vector<ModeSlot> assign_modes(const optics::ModeSpectrum& spectrum, double max_shift_hz,
                                   int n_fsr, double exclusion_band_hz);

struct ProbeDrive {
    double rabi_rad_s = 0.0;
    double detuning_rad_s = 0.0;
};

struct ReadoutYield {
    double photons_into_cavity = 0.0;
    double collected = 0.0;
    double collection_efficiency = 0.0;
};

/// Cavity-enhanced fluorescence from a probed two-level atom (resonant cavity).
ReadoutYield fluorescence_readout(const ProbeDrive& probe, double eta, const DressedState& dressed,
                                  double duration_s, double kappa_e_fraction);

/// Probability of picking up a neighbouring mode's light through its Lorentzian tail.
double probe_crosstalk(double mode_spacing_hz, double linewidth_hz, double probe_suppression);

} // namespace cmm::dressing
