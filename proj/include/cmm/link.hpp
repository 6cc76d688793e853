#pragma once

#include <vector>

namespace cmm::link {

struct LinkBudget {
    double eta = 7.0;
    double kappa_e_rad_s = 0.0;
    double kappa_i_rad_s = 0.0;
    double alpha_setup = 0.75;

    void validate() const;
};

/// Probability that the photon leaves through the output mirror:
/// eta/(eta+1) * kappa_e/(kappa_e+kappa_i).
double alpha_interface(double eta, double kappa_e_rad_s, double kappa_i_rad_s);
double alpha_interface(const LinkBudget& budget);

/// Heralded atom-atom success with a linear-optics BSM: 1/2 (alpha_i alpha_s)^2.
double bell_success(double alpha_interface, double alpha_setup);

/// Multiplexed Bell-pair rate in Hz.
double bell_rate(double p_success, int n_modes, double attempt_period_s);

struct PairYield {
    double expected = 0.0;
    int n_trials = 0;
    double p = 0.0;
    double variance = 0.0;
    int threshold = 0;
    double p_at_least = 0.0;   // P(pairs >= threshold)
};

/// Binomial(n_atoms, p) pair count from one scan; the tail is summed exactly.
PairYield pairs_from_scan(int n_atoms, double mean_p_success, int threshold);

/// Exact binomial upper tail P(X >= k) summed in log space.
double binomial_tail(int n, double p, int k);

struct AttemptSchedule {
    int n_registers = 15;
    int atoms_per_register = 15;
    double switching_time_s = 100e-9;
    double photon_window_s = 0.7e-6;

    void validate() const;
};

/// Registers scan in parallel, so only atoms_per_register attempts are sequential.
double scan_time(const AttemptSchedule& schedule);

struct CycleBudget {
    double init_time_s = 0.0;
    double scan_time_s = 0.0;
    double local_gate_time_s = 0.0;
    double measurement_time_s = 0.0;            // expected-value accounting
    double measurement_time_ceiling_s = 0.0;    // busiest mode
    double total_s = 0.0;                       // uses measurement_time_s
    double total_ceiling_s = 0.0;
};

struct CycleInputs {
    int pairs_needed = 40;
    int n_modes = 15;
    double t_measure_s = 10e-6;
    double init_time_s = 16e-6;
    double local_gate_time_s = 20e-6;
};

CycleBudget cnot_cycle_budget(const CycleInputs& inputs, const AttemptSchedule& schedule);

/// Free-space photonic interfaces scale linearly with the number of
/// communication qubits.
double free_space_baseline(double rate_per_qubit_hz, int n_comm_qubits);

} // namespace cmm::link
