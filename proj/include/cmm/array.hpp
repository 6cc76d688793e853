#pragma once

#include "cmm/common.hpp"
#include "cmm/dressing.hpp"
#include "cmm/optics.hpp"

#include <string>
#include <vector>

namespace cmm::array {

enum class Design { HgReadout, LgChain };

std::string to_string(Design design);
Design parse_design(const std::string& text);

struct AtomSite {
    double x = 0.0, y = 0.0, z = 0.0;   // m
    int register_id = 0;
    int mode_id = 0;                    // index into ArrayLayout::modes
    double applied_shift_hz = 0.0;
};

struct ArrayLayout {
    Design design = Design::HgReadout;
    optics::CavityGeometry geometry;
    std::vector<AtomSite> sites;
    std::vector<dressing::ModeSlot> modes;
    double min_spacing_m = 0.0;
    std::vector<std::string> warnings;

    int register_count() const;
};

struct HgLayoutOptions {
    int n_transverse = 25;
    int atoms_per_column = 256;
    int registers_per_column = 2;
    double spacing_z_m = 4e-6;
    double min_spacing_m = 4e-6;
};

/// Columns along z at the outermost intensity maximum of each HG_{n,0} mode,
/// odd n on +x and even n on -x. Each column is split into contiguous
/// registers that use successive longitudinal copies of the same mode.
ArrayLayout build_hg_layout(const optics::CavityGeometry& geom, const HgLayoutOptions& options = {});

struct LgChainOptions {
    int n_atoms = 225;
    double spacing_z_m = 3e-6;
    int n_registers = 15;
    double min_spacing_m = 3e-6;
};

/// On-axis chain centered in the cavity; register k is the k-th contiguous
/// block and uses modes[k].
ArrayLayout build_lg_chain(const optics::CavityGeometry& geom,
                           const std::vector<dressing::ModeSlot>& modes,
                           const LgChainOptions& options = {});

struct ThermalState {
    double temperature_k = 0.0;
    double trap_frequency_rad_s = hz_to_rad(100e3);
    double mass_kg = kRb87Mass;

    /// Per-axis position RMS in a harmonic trap, sqrt(kT / m w^2).
    double position_rms() const;
    void validate() const;
};

/// Thermal reduction of the coupling at the mode's peak: on axis for LG_{p,0},
/// at the outermost maximum for HG_{n,0}.
double thermal_reduction(const optics::TransverseMode& mode, const ThermalState& thermal,
                         const optics::CavityGeometry& geom);

/// Same, for an atom whose mean position is (x0, y0) in the waist plane.
/// LG modes are only supported on axis.
double thermal_reduction_at(const optics::TransverseMode& mode, const ThermalState& thermal,
                            const optics::CavityGeometry& geom, double x0, double y0);

struct CooperativityMap {
    std::vector<double> eta;
    double mean = 0.0;
    double std = 0.0;   // population standard deviation
    double min = 0.0;
    double max = 0.0;
};

CooperativityMap summarize(std::vector<double> eta);

/// eta = eta_0 * transverse intensity ratio * axial envelope
///     * dressing factor * cavity branching * thermal reduction.
CooperativityMap cooperativity_map(const ArrayLayout& layout, const dressing::LevelScheme& scheme,
                                   const dressing::DressedState& dressed, const ThermalState& thermal);

double residual_shift_hz(double distance_m, double beam_waist_m, double applied_shift_hz);

struct CrosstalkMap {
    std::vector<double> residual_shift_hz;   // worst residual shift seen by each site
    double exclusion_band_hz = 0.0;
};

CrosstalkMap control_crosstalk_map(const ArrayLayout& layout, double beam_waist_m, double applied_shift_hz);

/// g^2 / Delta for a single atom with g^2 = eta * kappa * gamma / 4 (rad/s).
double dispersive_shift_rad_s(double eta, double kappa_rad_s, double gamma_rad_s, double detuning_rad_s);

struct DispersiveLoad {
    double pull_hz = 0.0;       // signed expected pull
    double pull_abs_hz = 0.0;   // sum of magnitudes (no cancellation)
    double bound_hz = 0.0;      // 10% of the cavity linewidth
    int contributors = 0;
};

/// Expected frequency pull on `mode_id` from atoms of other modes that are in
/// the coupled state with probability p_synd.
DispersiveLoad dispersive_load(int mode_id, const ArrayLayout& layout, const dressing::LevelScheme& scheme,
                               const dressing::DressedState& dressed, double p_synd);

} // namespace cmm::array
