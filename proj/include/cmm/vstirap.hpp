#pragma once

#include "cmm/common.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cmm::vstirap {

/// Atomic basis of the effective model, in this order.
enum Level : int { kGround = 0, kExcited = 1, kQubit0 = 2, kQubit1 = 3, kSink = 4 };
inline constexpr int kLevelCount = 5;
const char* level_name(int level);

struct HilbertSpec {
    int fock_cutoff = 1;
    /// false: both qubit branches emit into one effective cavity mode.
    /// true: q0 emits into one polarization mode and q1 into the other.
    bool polarization_resolved = false;

    int modes() const { return polarization_resolved ? 2 : 1; }
    int dimension() const;
    void validate() const;
};

struct DynamicsParams {
    double eta = 7.0;
    double kappa_e_rad_s = 0.0;
    double kappa_i_rad_s = 0.0;
    double gamma_rad_s = hz_to_rad(3.95e6);   // e_plus linewidth
    double atom_detuning_rad_s = 0.0;          // e_plus relative to the drive
    double cavity_detuning_rad_s = 0.0;        // cavity relative to Raman resonance
    /// Fraction of the cavity coupling on the e_plus -> q0 branch; q1 gets the rest.
    double cavity_weight_q0 = 0.5;
    /// Spontaneous-decay destinations of e_plus (g, q0, q1, sink).
    std::map<std::string, double> branching{{"q0", 0.45}, {"q1", 0.45}, {"sink", 0.1}};

    double kappa_rad_s() const { return kappa_e_rad_s + kappa_i_rad_s; }
    /// Cooperativity convention: g^2 = eta * kappa * gamma / 4.
    double coupling_rad_s() const;
    void validate() const;
};

enum class DriveShape { LinearRamp, Table };

struct DriveProfile {
    DriveShape shape = DriveShape::LinearRamp;
    double slope_rad_s2 = 1e14;
    /// The ramp holds at this Rabi frequency once reached; <= 0 means no cap.
    double peak_rabi_rad_s = 0.0;
    double duration_s = 1e-6;
    /// For Table: (time, Rabi) knots, linearly interpolated and held at the ends.
    std::vector<std::pair<double, double>> table;

    static DriveProfile linear(double slope_rad_s2, double duration_s, double peak_rabi_rad_s = 0.0);
    static DriveProfile zero(double duration_s);

    double rabi(double t) const;
    void validate() const;
};

/// Lindblad generator split as H_eff(t) = H_eff0 + Omega(t) V, with jumps L_k.
struct Generator {
    HilbertSpec spec;
    DynamicsParams params;
    DriveProfile drive;
    Eigen::MatrixXcd h_eff0;
    Eigen::MatrixXcd drive_operator;
    std::vector<Eigen::MatrixXcd> jumps;
    Eigen::MatrixXcd photon_number;          // total over cavity modes
    std::array<Eigen::VectorXd, kLevelCount> level_projectors;   // diagonals

    int dimension() const { return static_cast<int>(h_eff0.rows()); }
};

Generator build_generator(const HilbertSpec& spec, const DynamicsParams& params, const DriveProfile& drive);

enum class Integrator { AdaptiveDopri5, FixedRk4 };

struct EvolveOptions {
    Integrator integrator = Integrator::AdaptiveDopri5;
    double rel_tol = 1e-8;
    double abs_tol = 1e-11;
    int samples = 401;             // output grid over [0, duration]
    int fixed_steps = 20000;       // Rk4 only
    long max_rhs_evaluations = 50'000'000;
};

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<double> drive_rabi_rad_s;
    std::vector<double> photon_flux;           // kappa_e <n>, photons/s
    std::vector<double> cumulative_emission;
    std::vector<double> mean_photons;
    std::vector<std::array<double, kLevelCount>> populations;
    double trace_error = 0.0;
    double min_eigenvalue = 0.0;
    long rhs_evaluations = 0;
    Eigen::MatrixXcd final_state;
};

TrajectoryResult evolve(const Generator& gen, const EvolveOptions& options = {});

double emission_probability(const TrajectoryResult& traj);

struct PhotonShape {
    double mean_time_s = 0.0;
    double rms_width_s = 0.0;
    double peak_flux = 0.0;
    double peak_time_s = 0.0;
};

PhotonShape photon_shape(const TrajectoryResult& traj);

/// Emission probability for a given cooperativity, other parameters fixed.
double emission_for_eta(double eta, const HilbertSpec& spec, DynamicsParams params, const DriveProfile& drive,
                        const EvolveOptions& options = {});

struct ArrayAverage {
    double mean_p_success = 0.0;
    std::vector<double> p_success;               // per site
    std::vector<double> eta_grid;
    std::vector<double> emission_grid;
};

/// Per-site emission from a uniform eta grid (>= 20 points, linear
/// interpolation), then P_s = 1/2 (emission * alpha_setup)^2 averaged over sites.
ArrayAverage array_average_success(const std::vector<double>& site_eta, const HilbertSpec& spec,
                                   const DynamicsParams& params, const DriveProfile& drive, double alpha_setup,
                                   int grid_points = 24, const EvolveOptions& options = {});

struct DetuningPoint {
    double detuning_rad_s = 0.0;
    double emission = 0.0;
    double relative_change = 0.0;   // Delta P_s / P_s
};

std::vector<DetuningPoint> detuning_sensitivity(const HilbertSpec& spec, const DynamicsParams& params,
                                                const DriveProfile& drive, const std::vector<double>& detunings_rad_s,
                                                const EvolveOptions& options = {});

/// Ramp slope whose emission at `params` equals `target`, found by bisection in
/// log(slope). Peak and duration are taken from the linear-ramp `drive` template.
double calibrate_ramp_slope(const HilbertSpec& spec, const DynamicsParams& params, const DriveProfile& drive,
                            double target_emission, double slope_lo, double slope_hi,
                            const EvolveOptions& options = {});

} // namespace cmm::vstirap
