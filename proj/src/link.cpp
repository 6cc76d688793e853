#include "cmm/link.hpp"

#include "cmm/common.hpp"

#include <algorithm>
#include <cmath>

namespace cmm::link {

void LinkBudget::validate() const
{
    require(eta >= 0.0, "cooperativity must be non-negative");
    require(kappa_e_rad_s >= 0.0 && kappa_i_rad_s >= 0.0, "cavity decay rates must be non-negative");
    require(kappa_e_rad_s + kappa_i_rad_s > 0.0, "cavity decay rates cannot both be zero");
    require(alpha_setup >= 0.0 && alpha_setup <= 1.0, "setup efficiency outside [0, 1]");
}

double alpha_interface(double eta, double kappa_e_rad_s, double kappa_i_rad_s)
{
    require(eta >= 0.0, "cooperativity must be non-negative");
    require(kappa_e_rad_s >= 0.0 && kappa_i_rad_s >= 0.0, "cavity decay rates must be non-negative");
    require(kappa_e_rad_s + kappa_i_rad_s > 0.0, "cavity decay rates cannot both be zero");
    return eta / (eta + 1.0) * kappa_e_rad_s / (kappa_e_rad_s + kappa_i_rad_s);
}

double alpha_interface(const LinkBudget& budget)
{
    budget.validate();
    return alpha_interface(budget.eta, budget.kappa_e_rad_s, budget.kappa_i_rad_s);
}

double bell_success(double alpha_interface, double alpha_setup)
{
    require(alpha_interface >= 0.0 && alpha_interface <= 1.0, "alpha_interface outside [0, 1]");
    require(alpha_setup >= 0.0 && alpha_setup <= 1.0, "alpha_setup outside [0, 1]");
    const double a = alpha_interface * alpha_setup;
    return 0.5 * a * a;
}

double bell_rate(double p_success, int n_modes, double attempt_period_s)
{
    require(p_success >= 0.0 && p_success <= 1.0, "success probability outside [0, 1]");
    require(n_modes >= 1, "at least one mode is required");
    require(attempt_period_s > 0.0, "attempt period must be positive");
    return n_modes * p_success / attempt_period_s;
}

double binomial_tail(int n, double p, int k)
{
    require(n >= 0, "trial count must be non-negative");
    require(p >= 0.0 && p <= 1.0, "probability outside [0, 1]");
    if (k <= 0)
        return 1.0;
    if (k > n)
        return 0.0;
    if (p == 0.0)
        return 0.0;
    if (p == 1.0)
        return 1.0;
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    double tail = 0.0;
    for (int j = k; j <= n; ++j) {
        const double log_choose = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
        tail += std::exp(log_choose + j * log_p + (n - j) * log_q);
    }
    return std::min(tail, 1.0);
}

PairYield pairs_from_scan(int n_atoms, double mean_p_success, int threshold)
{
    require(n_atoms >= 0, "atom count must be non-negative");
    require(mean_p_success >= 0.0 && mean_p_success <= 1.0, "success probability outside [0, 1]");
    PairYield y;
    y.n_trials = n_atoms;
    y.p = mean_p_success;
    y.expected = n_atoms * mean_p_success;
    y.variance = n_atoms * mean_p_success * (1.0 - mean_p_success);
    y.threshold = threshold;
    y.p_at_least = binomial_tail(n_atoms, mean_p_success, threshold);
    return y;
}

void AttemptSchedule::validate() const
{
    require(n_registers >= 1 && atoms_per_register >= 1, "register counts must be positive");
    require(switching_time_s >= 0.0 && photon_window_s >= 0.0, "schedule durations must be non-negative");
    require(switching_time_s + photon_window_s > 0.0, "attempt period must be positive");
}

double scan_time(const AttemptSchedule& schedule)
{
    schedule.validate();
    return schedule.atoms_per_register * (schedule.switching_time_s + schedule.photon_window_s);
}

CycleBudget cnot_cycle_budget(const CycleInputs& inputs, const AttemptSchedule& schedule)
{
    require(inputs.pairs_needed >= 0, "pair count must be non-negative");
    require(inputs.n_modes >= 1, "at least one mode is required");
    require(inputs.t_measure_s >= 0.0 && inputs.init_time_s >= 0.0 && inputs.local_gate_time_s >= 0.0,
            "cycle durations must be non-negative");
    CycleBudget b;
    b.init_time_s = inputs.init_time_s;
    b.scan_time_s = scan_time(schedule);
    b.local_gate_time_s = inputs.local_gate_time_s;
    b.measurement_time_s = static_cast<double>(inputs.pairs_needed) / inputs.n_modes * inputs.t_measure_s;
    const int slots = (inputs.pairs_needed + inputs.n_modes - 1) / inputs.n_modes;
    b.measurement_time_ceiling_s = slots * inputs.t_measure_s;
    const double fixed = b.init_time_s + b.scan_time_s + b.local_gate_time_s;
    b.total_s = fixed + b.measurement_time_s;
    b.total_ceiling_s = fixed + b.measurement_time_ceiling_s;
    return b;
}

double free_space_baseline(double rate_per_qubit_hz, int n_comm_qubits)
{
    require(rate_per_qubit_hz >= 0.0, "rate must be non-negative");
    require(n_comm_qubits >= 0, "qubit count must be non-negative");
    return rate_per_qubit_hz * n_comm_qubits;
}

} // namespace cmm::link
