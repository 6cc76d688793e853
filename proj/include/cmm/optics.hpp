#pragma once

#include <complex>
#include <string>
#include <vector>

namespace cmm::optics {

/// Two-mirror Fabry-Perot cavity. Lengths in meters.
struct CavityGeometry {
    double length_m = 0.0;
    double waist_m = 0.0;
    double wavelength_m = 780e-9;
    double finesse = 0.0;
    /// Round-trip intrinsic loss (absorption + scatter), fractional.
    double mirror_loss_total = 0.0;
    /// kappa_e / (kappa_e + kappa_i).
    double output_coupling_fraction = 1.0;
    bool symmetric = true;

    double rayleigh_range() const;
    void validate() const;

    /// Geometry whose kappa split follows from the intrinsic loss: the total
    /// round-trip loss is 2*pi/F, and everything that is not intrinsic loss
    /// leaves through the output coupler.
    static CavityGeometry from_losses(double length_m, double waist_m, double wavelength_m,
                                      double finesse, double mirror_loss_total);
};

struct DerivedParams {
    double fsr_hz = 0.0;
    double linewidth_hz = 0.0;   // FWHM
    double kappa_e_rad_s = 0.0;
    double kappa_i_rad_s = 0.0;
    double rayleigh_range_m = 0.0;
    double gouy_per_order_rad = 0.0;

    double kappa_rad_s() const { return kappa_e_rad_s + kappa_i_rad_s; }
    /// Gouy phase per transverse order as a fraction of pi; sets the fold ratio.
    double fold_ratio() const;
};

DerivedParams derived_params(const CavityGeometry& geom);

enum class ModeFamily { HermiteGauss, LaguerreGauss };

std::string to_string(ModeFamily family);
ModeFamily parse_family(const std::string& text);

/// HG_{n,m} or LG_{p,l}. Only (n,0) and (p,0) are evaluated.
struct TransverseMode {
    ModeFamily family = ModeFamily::HermiteGauss;
    int index_a = 0;   // HG: n, LG: p
    int index_b = 0;   // HG: m, LG: l

    static TransverseMode hg(int n) { return {ModeFamily::HermiteGauss, n, 0}; }
    static TransverseMode lg(int p) { return {ModeFamily::LaguerreGauss, p, 0}; }

    int order() const;
    void validate() const;
    std::string label() const;

    friend bool operator==(const TransverseMode&, const TransverseMode&) = default;
};

struct SpectrumEntry {
    TransverseMode mode;
    int longitudinal = 0;
    double offset_hz = 0.0;   // in [0, FSR)
};

struct ModeSpectrum {
    std::vector<SpectrumEntry> entries;   // ordered by mode index
    double fsr_hz = 0.0;
    double spacing_hz = 0.0;              // FSR / number of modes
    double grid_residual_hz = 0.0;        // max deviation of sorted offsets from the grid
    bool equally_spaced = false;

    /// Entries sorted by frequency offset.
    std::vector<SpectrumEntry> sorted_by_offset() const;
};

/// Offsets of modes with index 0..max_index (n for HG, p for LG) folded into one FSR.
ModeSpectrum mode_offsets(const CavityGeometry& geom, ModeFamily family, int max_index,
                          double grid_tolerance_hz = 1e6);

/// Nudges the waist (and with it the Gouy phase) so that `n_modes` consecutive
/// modes of `family` fold onto an equally spaced grid. The fold numerator is the
/// nearest integer to the natural fold that is coprime with `n_modes`.
CavityGeometry tune_for_equal_spacing(const CavityGeometry& geom, ModeFamily family, int n_modes);

/// eta_0 = 24 F / (pi k^2 w0^2): two-level cycling transition at an antinode on axis.
double peak_cooperativity(const CavityGeometry& geom);

/// Transverse-normalized paraxial mode field (1/m). Longitudinal standing-wave
/// structure is not included; only envelope, curvature and Gouy phase.
std::complex<double> mode_amplitude(const TransverseMode& mode, const CavityGeometry& geom,
                                    double x, double y, double z);

double mode_intensity(const TransverseMode& mode, const CavityGeometry& geom,
                      double x, double y, double z);

/// Positions (m, at z = 0) of the n+1 intensity maxima of HG_{n,0} along x.
std::vector<double> hg_intensity_maxima(int n, const CavityGeometry& geom);

/// Ratio of the mode's largest intensity in the z = 0 plane to the HG00 peak.
double mode_peak_factor(const TransverseMode& mode, const CavityGeometry& geom);

/// Normalized 1-D Hermite function psi_n(s), int psi_n^2 ds = 1.
double hermite_function(int n, double s);
/// Laguerre polynomial L_p(x) by upward recurrence.
double laguerre(int p, double x);

} // namespace cmm::optics
