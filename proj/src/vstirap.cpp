#include "cmm/vstirap.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/KroneckerProduct>

namespace cmm::vstirap {

namespace {

using Complex = std::complex<double>;
using State = std::vector<double>;
constexpr Complex kI{0.0, 1.0};

Eigen::MatrixXcd atomic(int to, int from)
{
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(kLevelCount, kLevelCount);
    m(to, from) = 1.0;
    return m;
}

Eigen::MatrixXcd annihilation(int cutoff)
{
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
    for (int n = 1; n <= cutoff; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// Embeds an atomic operator and one operator per cavity mode in the full space.
Eigen::MatrixXcd embed(const Eigen::MatrixXcd& atom, const std::vector<Eigen::MatrixXcd>& cavity)
{
    Eigen::MatrixXcd out = atom;
    for (const auto& c : cavity) {
        Eigen::MatrixXcd next = Eigen::kroneckerProduct(out, c).eval();
        out = std::move(next);
    }
    return out;
}

int level_index(const std::string& name)
{
    for (int i = 0; i < kLevelCount; ++i)
        if (name == level_name(i))
            return i;
    throw ValidationError("unknown atomic level '" + name + "'");
}

} // namespace

const char* level_name(int level)
{
    static constexpr const char* names[kLevelCount] = {"g", "e_plus", "q0", "q1", "sink"};
    if (level < 0 || level >= kLevelCount)
        throw ValidationError("atomic level index out of range");
    return names[level];
}

int HilbertSpec::dimension() const
{
    int d = kLevelCount;
    for (int m = 0; m < modes(); ++m)
        d *= fock_cutoff + 1;
    return d;
}

void HilbertSpec::validate() const
{
    require(fock_cutoff >= 1, "Fock cutoff must be at least 1");
    require(dimension() <= 64, "Hilbert space dimension exceeds 64");
}

double DynamicsParams::coupling_rad_s() const
{
    return std::sqrt(eta * kappa_rad_s() * gamma_rad_s / 4.0);
}

void DynamicsParams::validate() const
{
    require(eta >= 0.0, "cooperativity must be non-negative");
    require(kappa_e_rad_s >= 0.0 && kappa_i_rad_s >= 0.0, "cavity decay rates must be non-negative");
    require(kappa_rad_s() > 0.0, "cavity decay rates cannot both be zero");
    require(gamma_rad_s >= 0.0, "excited-state linewidth must be non-negative");
    require(std::isfinite(atom_detuning_rad_s) && std::isfinite(cavity_detuning_rad_s), "detunings must be finite");
    require(cavity_weight_q0 >= 0.0 && cavity_weight_q0 <= 1.0, "cavity weight outside [0, 1]");
    static const std::set<std::string> destinations{"g", "q0", "q1", "sink"};
    double total = 0.0;
    for (const auto& [dest, p] : branching) {
        require(destinations.count(dest) == 1, "unknown decay destination '" + dest + "'");
        require(p >= 0.0, "negative branching probability for '" + dest + "'");
        total += p;
    }
    require(std::abs(total - 1.0) < 1e-9, "decay branching must sum to 1");
}

DriveProfile DriveProfile::linear(double slope_rad_s2, double duration_s, double peak_rabi_rad_s)
{
    DriveProfile d;
    d.shape = DriveShape::LinearRamp;
    d.slope_rad_s2 = slope_rad_s2;
    d.duration_s = duration_s;
    d.peak_rabi_rad_s = peak_rabi_rad_s;
    return d;
}

DriveProfile DriveProfile::zero(double duration_s)
{
    return linear(0.0, duration_s);
}

double DriveProfile::rabi(double t) const
{
    if (shape == DriveShape::LinearRamp) {
        const double omega = slope_rad_s2 * std::max(t, 0.0);
        return peak_rabi_rad_s > 0.0 ? std::min(omega, peak_rabi_rad_s) : omega;
    }
    if (t <= table.front().first)
        return table.front().second;
    if (t >= table.back().first)
        return table.back().second;
    const auto hi = std::upper_bound(table.begin(), table.end(), t,
                                     [](double v, const auto& knot) { return v < knot.first; });
    const auto lo = hi - 1;
    const double f = (t - lo->first) / (hi->first - lo->first);
    return lo->second + f * (hi->second - lo->second);
}

void DriveProfile::validate() const
{
    require(duration_s > 0.0, "drive duration must be positive");
    if (shape == DriveShape::LinearRamp) {
        require(slope_rad_s2 >= 0.0, "ramp slope must be non-negative");
        return;
    }
    require(table.size() >= 2, "drive table needs at least two knots");
    for (std::size_t i = 0; i < table.size(); ++i) {
        require(table[i].second >= 0.0, "drive table Rabi frequencies must be non-negative");
        if (i > 0)
            require(table[i].first > table[i - 1].first, "drive table times must increase strictly");
    }
}

Generator build_generator(const HilbertSpec& spec, const DynamicsParams& params, const DriveProfile& drive)
{
    spec.validate();
    params.validate();
    drive.validate();

    Generator gen;
    gen.spec = spec;
    gen.params = params;
    gen.drive = drive;

    const int c = spec.fock_cutoff;
    const Eigen::MatrixXcd a = annihilation(c);
    const Eigen::MatrixXcd id_c = Eigen::MatrixXcd::Identity(c + 1, c + 1);
    const Eigen::MatrixXcd id_a = Eigen::MatrixXcd::Identity(kLevelCount, kLevelCount);

    std::vector<Eigen::MatrixXcd> mode_ops;   // a_k on the full space
    for (int k = 0; k < spec.modes(); ++k) {
        std::vector<Eigen::MatrixXcd> factors(spec.modes(), id_c);
        factors[k] = a;
        mode_ops.push_back(embed(id_a, factors));
    }
    const std::vector<Eigen::MatrixXcd> cavity_id(spec.modes(), id_c);
    auto atom_op = [&](int to, int from) { return embed(atomic(to, from), cavity_id); };

    const int dim = spec.dimension();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    gen.photon_number = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& ak : mode_ops) {
        const Eigen::MatrixXcd n = ak.adjoint() * ak;
        gen.photon_number += n;
        h += params.cavity_detuning_rad_s * n;
    }
    h += params.atom_detuning_rad_s * atom_op(kExcited, kExcited);

    // Cavity-assisted branches e_plus -> q0 and e_plus -> q1 share the coupling g.
    const double g = params.coupling_rad_s();
    const double weights[2] = {params.cavity_weight_q0, 1.0 - params.cavity_weight_q0};
    const int qubits[2] = {kQubit0, kQubit1};
    for (int b = 0; b < 2; ++b) {
        const Eigen::MatrixXcd& ak = mode_ops[spec.polarization_resolved ? b : 0];
        const Eigen::MatrixXcd term = g * std::sqrt(weights[b]) * ak.adjoint() * atom_op(qubits[b], kExcited);
        h += term + term.adjoint();
    }

    gen.drive_operator = 0.5 * (atom_op(kExcited, kGround) + atom_op(kGround, kExcited));

    for (const auto& ak : mode_ops)
        gen.jumps.push_back(std::sqrt(params.kappa_rad_s()) * ak);
    for (const auto& [dest, p] : params.branching) {
        if (p > 0.0)
            gen.jumps.push_back(std::sqrt(params.gamma_rad_s * p) * atom_op(level_index(dest), kExcited));
    }

    Eigen::MatrixXcd decay = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& l : gen.jumps)
        decay += l.adjoint() * l;
    gen.h_eff0 = h - 0.5 * kI * decay;

    for (int level = 0; level < kLevelCount; ++level)
        gen.level_projectors[level] = atom_op(level, level).diagonal().real();
    return gen;
}

namespace {

class MasterEquation {
public:
    MasterEquation(const Generator& gen, long max_rhs)
        : gen_(gen), dim_(gen.dimension()), n_diag_(gen.photon_number.diagonal().real()), max_rhs_(max_rhs),
          heff_(dim_, dim_), product_(dim_, dim_)
    {
    }

    std::size_t state_size() const { return 2 * static_cast<std::size_t>(dim_) * dim_ + 1; }

    void operator()(const State& x, State& dx, double t)
    {
        if (++evaluations_ > max_rhs_)
            throw NumericalError("master equation exceeded its evaluation budget (step size collapse)");
        Eigen::Map<const Eigen::MatrixXcd> rho(reinterpret_cast<const Complex*>(x.data()), dim_, dim_);
        Eigen::Map<Eigen::MatrixXcd> drho(reinterpret_cast<Complex*>(dx.data()), dim_, dim_);

        heff_ = gen_.h_eff0;
        const double omega = gen_.drive.rabi(t);
        if (omega != 0.0)
            heff_ += omega * gen_.drive_operator;
        product_.noalias() = heff_ * rho;
        // -i (H rho - rho H^dag) with rho Hermitian keeps the update Hermitian.
        drho = -kI * (product_ - product_.adjoint());
        for (const auto& l : gen_.jumps)
            drho.noalias() += l * rho * l.adjoint();

        dx.back() = gen_.params.kappa_e_rad_s * (n_diag_.array() * rho.diagonal().real().array()).sum();
    }

    long evaluations() const { return evaluations_; }

private:
    const Generator& gen_;
    int dim_;
    Eigen::VectorXd n_diag_;
    long max_rhs_;
    long evaluations_ = 0;
    Eigen::MatrixXcd heff_;
    Eigen::MatrixXcd product_;
};

void record(const Generator& gen, const State& x, double t, TrajectoryResult& out)
{
    const int dim = gen.dimension();
    Eigen::Map<const Eigen::MatrixXcd> rho(reinterpret_cast<const Complex*>(x.data()), dim, dim);
    const Eigen::VectorXd diag = rho.diagonal().real();
    const double n_mean = (gen.photon_number.diagonal().real().array() * diag.array()).sum();

    out.times.push_back(t);
    out.drive_rabi_rad_s.push_back(gen.drive.rabi(t));
    out.mean_photons.push_back(n_mean);
    out.photon_flux.push_back(std::max(0.0, gen.params.kappa_e_rad_s * n_mean));
    out.cumulative_emission.push_back(x.back());
    std::array<double, kLevelCount> pops{};
    for (int level = 0; level < kLevelCount; ++level)
        pops[level] = gen.level_projectors[level].dot(diag);
    out.populations.push_back(pops);

    out.trace_error = std::max(out.trace_error, std::abs(1.0 - diag.sum()));
    const Eigen::MatrixXcd hermitian = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = std::min(out.min_eigenvalue, solver.eigenvalues().minCoeff());
}

} // namespace

TrajectoryResult evolve(const Generator& gen, const EvolveOptions& options)
{
    require(options.samples >= 2, "trajectory needs at least two samples");
    require(options.rel_tol > 0.0 && options.abs_tol > 0.0, "solver tolerances must be positive");
    const double duration = gen.drive.duration_s;
    const int dim = gen.dimension();

    MasterEquation system(gen, options.max_rhs_evaluations);
    State x(system.state_size(), 0.0);
    x[0] = 1.0;   // |g, 0> <g, 0|

    std::vector<double> times(options.samples);
    for (int i = 0; i < options.samples; ++i)
        times[i] = duration * i / (options.samples - 1);

    TrajectoryResult out;
    out.min_eigenvalue = 1.0;
    auto observer = [&](const State& s, double t) { record(gen, s, t, out); };

    if (options.integrator == Integrator::AdaptiveDopri5) {
        namespace ode = boost::numeric::odeint;
        auto stepper = ode::make_dense_output(options.abs_tol, options.rel_tol, ode::runge_kutta_dopri5<State>());
        const double dt0 = std::min(duration / (options.samples - 1), 1e-9);
        try {
            ode::integrate_times(stepper, std::ref(system), x, times.begin(), times.end(), dt0, observer);
        } catch (const NumericalError&) {
            throw;
        } catch (const std::exception& e) {
            throw NumericalError(std::string("adaptive integration failed: ") + e.what());
        }
    } else {
        require(options.fixed_steps >= 1, "fixed-step integration needs at least one step");
        namespace ode = boost::numeric::odeint;
        const int per_sample = (options.fixed_steps + options.samples - 2) / (options.samples - 1);
        ode::runge_kutta4<State> stepper;
        observer(x, 0.0);
        for (int i = 1; i < options.samples; ++i) {
            const double t0 = times[i - 1];
            const double h = (times[i] - t0) / per_sample;
            for (int s = 0; s < per_sample; ++s)
                stepper.do_step(std::ref(system), x, t0 + s * h, h);
            observer(x, times[i]);
        }
    }

    for (double v : x)
        if (!std::isfinite(v))
            throw NumericalError("master equation produced non-finite values");
    out.rhs_evaluations = system.evaluations();
    out.final_state = Eigen::Map<const Eigen::MatrixXcd>(reinterpret_cast<const Complex*>(x.data()), dim, dim);
    return out;
}

double emission_probability(const TrajectoryResult& traj)
{
    require(!traj.cumulative_emission.empty(), "empty trajectory");
    return traj.cumulative_emission.back();
}

PhotonShape photon_shape(const TrajectoryResult& traj)
{
    PhotonShape shape;
    double area = 0.0, first = 0.0, second = 0.0;
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
        const double dt = traj.times[i] - traj.times[i - 1];
        const double f0 = traj.photon_flux[i - 1], f1 = traj.photon_flux[i];
        const double t0 = traj.times[i - 1], t1 = traj.times[i];
        area += 0.5 * dt * (f0 + f1);
        first += 0.5 * dt * (f0 * t0 + f1 * t1);
        second += 0.5 * dt * (f0 * t0 * t0 + f1 * t1 * t1);
    }
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (traj.photon_flux[i] > shape.peak_flux) {
            shape.peak_flux = traj.photon_flux[i];
            shape.peak_time_s = traj.times[i];
        }
    }
    if (area > 0.0) {
        shape.mean_time_s = first / area;
        shape.rms_width_s = std::sqrt(std::max(0.0, second / area - shape.mean_time_s * shape.mean_time_s));
    }
    return shape;
}

double emission_for_eta(double eta, const HilbertSpec& spec, DynamicsParams params, const DriveProfile& drive,
                        const EvolveOptions& options)
{
    params.eta = eta;
    EvolveOptions light = options;
    light.samples = std::min(light.samples, 33);
    return emission_probability(evolve(build_generator(spec, params, drive), light));
}

ArrayAverage array_average_success(const std::vector<double>& site_eta, const HilbertSpec& spec,
                                   const DynamicsParams& params, const DriveProfile& drive, double alpha_setup,
                                   int grid_points, const EvolveOptions& options)
{
    require(!site_eta.empty(), "cooperativity map is empty");
    require(grid_points >= 20, "eta interpolation grid needs at least 20 points");
    require(alpha_setup >= 0.0 && alpha_setup <= 1.0, "setup efficiency outside [0, 1]");
    for (double eta : site_eta)
        require(eta >= 0.0 && std::isfinite(eta), "site cooperativities must be finite and non-negative");

    ArrayAverage result;
    const double eta_max = *std::max_element(site_eta.begin(), site_eta.end());
    result.p_success.assign(site_eta.size(), 0.0);
    if (eta_max == 0.0)
        return result;

    for (int i = 0; i < grid_points; ++i) {
        const double eta = eta_max * i / (grid_points - 1);
        result.eta_grid.push_back(eta);
        result.emission_grid.push_back(eta == 0.0 ? 0.0 : emission_for_eta(eta, spec, params, drive, options));
    }
    const double step = eta_max / (grid_points - 1);
    double sum = 0.0;
    for (std::size_t s = 0; s < site_eta.size(); ++s) {
        const double pos = site_eta[s] / step;
        const int i = std::min(static_cast<int>(pos), grid_points - 2);
        const double f = pos - i;
        const double emission = (1.0 - f) * result.emission_grid[i] + f * result.emission_grid[i + 1];
        const double a = std::clamp(emission, 0.0, 1.0) * alpha_setup;
        result.p_success[s] = 0.5 * a * a;
        sum += result.p_success[s];
    }
    result.mean_p_success = sum / static_cast<double>(site_eta.size());
    return result;
}

std::vector<DetuningPoint> detuning_sensitivity(const HilbertSpec& spec, const DynamicsParams& params,
                                                const DriveProfile& drive, const std::vector<double>& detunings_rad_s,
                                                const EvolveOptions& options)
{
    require(std::find(detunings_rad_s.begin(), detunings_rad_s.end(), 0.0) != detunings_rad_s.end(),
            "detuning grid must include zero");
    DynamicsParams p = params;
    p.atom_detuning_rad_s = 0.0;
    const double reference = emission_for_eta(p.eta, spec, p, drive, options);

    std::vector<DetuningPoint> points;
    for (double delta : detunings_rad_s) {
        p.atom_detuning_rad_s = delta;
        const double e = delta == 0.0 ? reference : emission_for_eta(p.eta, spec, p, drive, options);
        if (reference == 0.0) {
            // A dark system stays dark at every detuning.
            if (e != 0.0)
                throw NumericalError("emission appears off resonance but not on resonance");
            points.push_back({delta, 0.0, 0.0});
            continue;
        }
        const double ratio = e / reference;
        points.push_back({delta, e, ratio * ratio - 1.0});
    }
    return points;
}

double calibrate_ramp_slope(const HilbertSpec& spec, const DynamicsParams& params, const DriveProfile& drive,
                            double target_emission, double slope_lo, double slope_hi, const EvolveOptions& options)
{
    require(target_emission > 0.0 && target_emission < 1.0, "target emission outside (0, 1)");
    require(drive.shape == DriveShape::LinearRamp, "calibration needs a linear-ramp drive");
    require(slope_lo > 0.0 && slope_hi > slope_lo, "calibration bracket must be positive and ordered");

    auto emission_at = [&](double slope) {
        DriveProfile d = drive;
        d.slope_rad_s2 = slope;
        return emission_for_eta(params.eta, spec, params, d, options);
    };
    // Emission falls as the ramp steepens.
    if (emission_at(slope_lo) < target_emission || emission_at(slope_hi) > target_emission)
        throw NumericalError("calibration target is not bracketed by the slope interval");
    double lo = std::log(slope_lo), hi = std::log(slope_hi);
    while (hi - lo > 1e-5) {
        const double mid = 0.5 * (lo + hi);
        if (emission_at(std::exp(mid)) > target_emission)
            lo = mid;
        else
            hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

} // namespace cmm::vstirap
