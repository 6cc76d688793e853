#include "cmm/app/commands.hpp"

#include "cmm/app/svg.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace cmm::app {

namespace {

// Fixed formatting keeps CSV output byte-identical across runs.
std::string num(double v)
{
    return fmt::format("{:.10g}", v);
}

template <typename... Args>
void say(RunContext& ctx, fmt::format_string<Args...> format, Args&&... args)
{
    if (ctx.log)
        fmt::print(*ctx.log, "{}\n", fmt::format(format, std::forward<Args>(args)...));
}

template <typename T>
const T& need(const std::optional<T>& block, const char* name, const char* subcommand)
{
    require(block.has_value(), fmt::format("subcommand '{}' needs the '{}' config block", subcommand, name));
    return *block;
}

std::uint64_t need_seed(const RunContext& ctx, const char* subcommand)
{
    require(ctx.seed.has_value(),
            fmt::format("subcommand '{}' is stochastic and needs a seed (--seed or output.seed)", subcommand));
    return *ctx.seed;
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<dressing::ModeSlot> usable_modes(const DesignConfig& cfg, const optics::CavityGeometry& geom)
{
    const auto& cavity = need(cfg.cavity, "cavity", "coopmap");
    const auto& dress = need(cfg.dressing, "dressing", "coopmap");
    const auto spectrum = optics::mode_offsets(geom, cavity.family, cavity.max_index);
    return dressing::assign_modes(spectrum, dress.max_shift_hz, dress.n_fsr, exclusion_band_hz(cfg));
}

} // namespace

void RunContext::write(const std::string& name, const std::string& contents)
{
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out)
        throw NumericalError("cannot write output file '" + (out_dir / name).string() + "'");
    out << contents;
    files.push_back(name);
}

optics::CavityGeometry effective_geometry(const CavityBlock& cavity)
{
    if (!cavity.tune_equal_spacing)
        return cavity.geometry;
    return optics::tune_for_equal_spacing(cavity.geometry, cavity.family, cavity.tune_modes);
}

double exclusion_band_hz(const DesignConfig& cfg)
{
    if (!cfg.dressing || cfg.dressing->control_waist_m <= 0.0 || !cfg.array
        || cfg.array->design != array::Design::LgChain)
        return 0.0;
    return array::residual_shift_hz(cfg.array->lg.spacing_z_m, cfg.dressing->control_waist_m,
                                    cfg.dressing->max_shift_hz);
}

CooperativityResult build_cooperativity(const DesignConfig& cfg)
{
    const auto& cavity = need(cfg.cavity, "cavity", "coopmap");
    const auto& levels = need(cfg.levels, "levels", "coopmap");
    const auto& dress = need(cfg.dressing, "dressing", "coopmap");
    const auto& arr = need(cfg.array, "array", "coopmap");

    CooperativityResult r;
    r.geometry = effective_geometry(cavity);
    r.dressed = dressing::dress(dress.field, levels);
    if (arr.design == array::Design::HgReadout) {
        require(cavity.family == optics::ModeFamily::HermiteGauss, "hg_readout design needs an hg cavity family");
        r.layout = array::build_hg_layout(r.geometry, arr.hg);
    } else {
        require(cavity.family == optics::ModeFamily::LaguerreGauss, "lg_chain design needs an lg cavity family");
        r.layout = array::build_lg_chain(r.geometry, usable_modes(cfg, r.geometry), arr.lg);
    }
    r.map = array::cooperativity_map(r.layout, levels, r.dressed, arr.thermal);
    return r;
}

void run_spectrum(const DesignConfig& cfg, RunContext& ctx)
{
    const auto& cavity = need(cfg.cavity, "cavity", "spectrum");
    const auto geom = effective_geometry(cavity);
    const auto params = optics::derived_params(geom);
    const auto natural = optics::mode_offsets(cavity.geometry, cavity.family, cavity.max_index);
    const auto spectrum = optics::mode_offsets(geom, cavity.family, cavity.max_index);

    std::string csv = "family,index_a,index_b,order,offset_hz\n";
    for (const auto& e : spectrum.entries)
        csv += fmt::format("{},{},{},{},{}\n", optics::to_string(e.mode.family), e.mode.index_a, e.mode.index_b,
                           e.mode.order(), num(e.offset_hz));
    ctx.write("spectrum.csv", csv);

    if (ctx.svg) {
        svg::Plot plot;
        plot.title = fmt::format("Cavity spectrum: {} {} modes", spectrum.entries.size(),
                                 optics::to_string(cavity.family));
        plot.x_label = "frequency offset (GHz)";
        plot.y_label = "peak cooperativity / eta_0";
        plot.y_range = std::pair{0.0, 1.1};
        svg::Series stems;
        stems.style = svg::Style::Stem;
        for (const auto& e : spectrum.entries) {
            stems.x.push_back(e.offset_hz * 1e-9);
            stems.y.push_back(optics::mode_peak_factor(e.mode, geom));
        }
        plot.series.push_back(stems);
        ctx.write("spectrum.svg", plot.render());
    }

    say(ctx, "FSR                 {:.6g} GHz", params.fsr_hz * 1e-9);
    say(ctx, "linewidth (FWHM)    {:.6g} kHz", params.linewidth_hz * 1e-3);
    say(ctx, "Rayleigh range      {:.6g} mm (table geometry {:.6g} mm)", params.rayleigh_range_m * 1e3,
        cavity.geometry.rayleigh_range() * 1e3);
    say(ctx, "Gouy per order      {:.6f} pi", params.gouy_per_order_rad / kPi);
    say(ctx, "peak cooperativity  {:.4g}", optics::peak_cooperativity(geom));
    if (cavity.tune_equal_spacing)
        say(ctx, "waist tuned         {:.6g} um -> {:.6g} um (untuned grid residual {:.4g} MHz)",
            cavity.geometry.waist_m * 1e6, geom.waist_m * 1e6, natural.grid_residual_hz * 1e-6);
    say(ctx, "grid spacing        {:.6g} MHz, residual {:.3g} Hz, equally spaced: {}", spectrum.spacing_hz * 1e-6,
        spectrum.grid_residual_hz, spectrum.equally_spaced ? "yes" : "no");
}

void run_coopmap(const DesignConfig& cfg, RunContext& ctx)
{
    const auto r = build_cooperativity(cfg);
    const auto& arr = *cfg.array;

    std::string csv = "site_id,x,y,z,register,mode,eta\n";
    for (std::size_t i = 0; i < r.layout.sites.size(); ++i) {
        const auto& s = r.layout.sites[i];
        csv += fmt::format("{},{},{},{},{},{},{}\n", i, num(s.x), num(s.y), num(s.z), s.register_id,
                           r.layout.modes[s.mode_id].mode.label(), num(r.map.eta[i]));
    }
    ctx.write("layout.csv", csv);

    ctx.write("summary.csv",
              fmt::format("design,temperature_k,sites,registers,mean,std,min,max\n{},{},{},{},{},{},{},{}\n",
                          array::to_string(arr.design), num(arr.thermal.temperature_k), r.layout.sites.size(),
                          r.layout.register_count(), num(r.map.mean), num(r.map.std), num(r.map.min),
                          num(r.map.max)));

    if (arr.design == array::Design::LgChain) {
        std::string thermal = "temperature_k,mode,reduction\n";
        std::vector<int> orders;
        for (const auto& slot : r.layout.modes)
            orders.push_back(slot.mode.index_a);
        std::sort(orders.begin(), orders.end());
        orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
        for (int step = 0; step <= 20; ++step) {
            array::ThermalState th = arr.thermal;
            th.temperature_k = 50e-6 * step / 20.0;
            for (int p : orders)
                thermal += fmt::format("{},{},{}\n", num(th.temperature_k), optics::TransverseMode::lg(p).label(),
                                       num(array::thermal_reduction(optics::TransverseMode::lg(p), th, r.geometry)));
        }
        ctx.write("thermal.csv", thermal);
    }

    if (ctx.svg) {
        svg::Plot plot;
        plot.title = fmt::format("Cooperativity map ({}), mean {:.3g}, std {:.3g}", array::to_string(arr.design),
                                 r.map.mean, r.map.std);
        plot.x_label = "z (um)";
        plot.color_label = "eta";
        svg::Series pts;
        pts.style = svg::Style::ColorMarkers;
        const bool chain = arr.design == array::Design::LgChain;
        plot.y_label = chain ? "eta" : "x (um)";
        for (std::size_t i = 0; i < r.layout.sites.size(); ++i) {
            pts.x.push_back(r.layout.sites[i].z * 1e6);
            pts.y.push_back(chain ? r.map.eta[i] : r.layout.sites[i].x * 1e6);
            pts.color_value.push_back(r.map.eta[i]);
        }
        plot.series.push_back(pts);
        ctx.write("coopmap.svg", plot.render());
    }

    say(ctx, "design              {}", array::to_string(arr.design));
    say(ctx, "sites / registers   {} / {}", r.layout.sites.size(), r.layout.register_count());
    say(ctx, "dressing factor     {:.4f}", r.dressed.cooperativity_factor(cfg.levels->gamma_e_rad_s));
    say(ctx, "eta mean / std      {:.4f} / {:.4f}", r.map.mean, r.map.std);
    say(ctx, "eta min / max       {:.4f} / {:.4f}", r.map.min, r.map.max);
    for (const auto& w : r.layout.warnings)
        say(ctx, "warning: {}", w);
}

void run_syndrome(const DesignConfig& cfg, RunContext& ctx)
{
    const auto& search = need(cfg.search, "search", "syndrome");
    syndrome::SearchConfig base = search.base;
    base.rng_seed = need_seed(ctx, "syndrome");

    const auto rows = syndrome::scaling_report(search.n_grid, base, search.mc_trials);
    std::string csv = "N,variant,mean_time_s,std_time_s\n";
    for (const auto& row : rows)
        csv += fmt::format("{},{},{},{}\n", row.n_atoms, row.variant, num(row.mean_time_s), num(row.std_time_s));
    ctx.write("scaling.csv", csv);

    syndrome::SearchConfig trace_cfg = base;
    trace_cfg.n_atoms = search.trace_atoms;
    const auto trace = syndrome::simulate_extraction(trace_cfg);
    std::string tcsv = "time,mode,register,subset,outcome\n";
    for (const auto& e : trace.events)
        tcsv += fmt::format("{},{},{},{}:{},{}\n", num(e.time_s), e.mode, e.register_id, e.subset_begin,
                            e.subset_end, e.positive ? 1 : 0);
    ctx.write("trace.csv", tcsv);

    if (ctx.svg) {
        svg::Plot plot;
        plot.title = "Syndrome readout duration";
        plot.x_label = "number of atoms";
        plot.y_label = "readout time (s)";
        plot.log_x = true;
        plot.log_y = true;
        const std::vector<std::pair<std::string, std::string>> styles{
            {"free_space", "#444444"}, {"single_mode", "#d62728"}, {"multimode", "#1f77b4"}};
        for (const auto& [variant, color] : styles) {
            svg::Series line, mc;
            line.label = variant == "multimode" ? fmt::format("multimode ({} modes)", base.n_modes) : variant;
            line.color = mc.color = color;
            line.dashed = variant == "free_space";
            mc.style = svg::Style::Markers;
            for (const auto& row : rows) {
                if (row.variant == variant) {
                    line.x.push_back(static_cast<double>(row.n_atoms));
                    line.y.push_back(row.mean_time_s);
                } else if (row.variant == variant + "_mc") {
                    mc.x.push_back(static_cast<double>(row.n_atoms));
                    mc.y.push_back(row.mean_time_s);
                    mc.y_err.push_back(row.std_time_s);
                }
            }
            if (!line.x.empty())
                plot.series.push_back(line);
            if (!mc.x.empty()) {
                mc.label = variant + " Monte Carlo";
                plot.series.push_back(mc);
            }
        }
        ctx.write("scaling.svg", plot.render());
    }

    const int batch = syndrome::effective_batch(trace_cfg.n_atoms, base.n_batch, base.n_modes);
    say(ctx, "trace N={} batch={} modes={}: {} queries, {} rounds, wall time {:.4g} us",
        trace_cfg.n_atoms, batch, base.n_modes, trace.total_queries, trace.rounds, trace.total_time_s * 1e6);
    say(ctx, "closed form         {:.4g} us",
        syndrome::total_steps(trace_cfg.n_atoms, batch, base.n_modes, base.p_synd) * base.t_query_s * 1e6);
    say(ctx, "faults planted / identified: {} / {}", trace.planted_faults.size(), trace.identified_faults.size());
}

void run_bell(const DesignConfig& cfg, RunContext& ctx)
{
    const auto& l = need(cfg.link, "link", "bell");
    const double alpha = link::alpha_interface(l.budget);
    const double ps = link::bell_success(alpha, l.budget.alpha_setup);
    const double rate = link::bell_rate(ps, l.n_modes, l.attempt_period_s);
    const auto yield = link::pairs_from_scan(l.scan_atoms, l.mean_p_success, l.cycle.pairs_needed);
    const double free_space = link::free_space_baseline(l.free_space_rate_hz, l.n_comm_qubits);
    const double rate_mean = link::bell_rate(l.mean_p_success, l.n_modes, l.attempt_period_s);

    ctx.write("bell.csv",
              fmt::format("eta,kappa_e_hz,kappa_i_hz,alpha_interface,alpha_setup,p_success,n_modes,attempt_period_s,"
                          "rate_hz,mean_p_success,rate_at_mean_hz,scan_atoms,expected_pairs,pairs_needed,"
                          "p_at_least_needed,free_space_rate_hz,n_comm_qubits,free_space_total_hz\n"
                          "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                          num(l.budget.eta), num(rad_to_hz(l.budget.kappa_e_rad_s)),
                          num(rad_to_hz(l.budget.kappa_i_rad_s)), num(alpha), num(l.budget.alpha_setup), num(ps),
                          l.n_modes, num(l.attempt_period_s), num(rate), num(l.mean_p_success), num(rate_mean),
                          l.scan_atoms, num(yield.expected), l.cycle.pairs_needed, num(yield.p_at_least),
                          num(l.free_space_rate_hz), l.n_comm_qubits, num(free_space)));

    say(ctx, "alpha_interface     {:.4f}", alpha);
    say(ctx, "P_s                 {:.4f}", ps);
    say(ctx, "rate ({} modes)     {:.4g} MHz at P_s, {:.4g} MHz at mean P_s {:.3g}", l.n_modes, rate * 1e-6,
        rate_mean * 1e-6, l.mean_p_success);
    say(ctx, "pairs per scan      {:.4g} expected, P(>= {}) = {:.4f}", yield.expected, l.cycle.pairs_needed,
        yield.p_at_least);
    say(ctx, "free-space baseline {:.4g} Hz", free_space);
}

void run_cycle(const DesignConfig& cfg, RunContext& ctx)
{
    const auto& l = need(cfg.link, "link", "cycle");
    const auto b = link::cnot_cycle_budget(l.cycle, l.schedule);
    ctx.write("cycle.csv",
              fmt::format("pairs_needed,n_modes,init_s,scan_s,local_gate_s,measurement_s,measurement_ceiling_s,"
                          "total_s,total_ceiling_s,accounting\n{},{},{},{},{},{},{},{},{},expected\n",
                          l.cycle.pairs_needed, l.cycle.n_modes, num(b.init_time_s), num(b.scan_time_s),
                          num(b.local_gate_time_s), num(b.measurement_time_s), num(b.measurement_time_ceiling_s),
                          num(b.total_s), num(b.total_ceiling_s)));
    say(ctx, "init                {:.4g} us", b.init_time_s * 1e6);
    say(ctx, "scan                {:.4g} us", b.scan_time_s * 1e6);
    say(ctx, "local gates         {:.4g} us", b.local_gate_time_s * 1e6);
    say(ctx, "measurement         {:.4g} us expected, {:.4g} us busiest mode", b.measurement_time_s * 1e6,
        b.measurement_time_ceiling_s * 1e6);
    say(ctx, "total               {:.4g} us expected, {:.4g} us ceiling", b.total_s * 1e6, b.total_ceiling_s * 1e6);
}

void run_vstirap(const DesignConfig& cfg, RunContext& ctx)
{
    const auto& d = need(cfg.dynamics, "dynamics", "vstirap");

    struct Curve {
        std::string name;
        vstirap::DriveProfile drive;
        vstirap::TrajectoryResult traj;
    };
    std::vector<Curve> curves{{"default", d.drive, {}}};
    if (d.compare_slope_rad_s2 > 0.0 && d.drive.shape == vstirap::DriveShape::LinearRamp) {
        auto drive = d.drive;
        drive.slope_rad_s2 = d.compare_slope_rad_s2;
        curves.push_back({"compare", drive, {}});
    }
    for (auto& c : curves)
        c.traj = vstirap::evolve(vstirap::build_generator(d.spec, d.params, c.drive), d.options);

    std::string csv = "curve,t_s,drive_rabi_hz,flux_per_s,cumulative,mean_photons";
    for (int level = 0; level < vstirap::kLevelCount; ++level)
        csv += fmt::format(",pop_{}", vstirap::level_name(level));
    csv += "\n";
    for (const auto& c : curves) {
        const auto& t = c.traj;
        for (std::size_t i = 0; i < t.times.size(); ++i) {
            csv += fmt::format("{},{},{},{},{},{}", c.name, num(t.times[i]), num(rad_to_hz(t.drive_rabi_rad_s[i])),
                               num(t.photon_flux[i]), num(t.cumulative_emission[i]), num(t.mean_photons[i]));
            for (double p : t.populations[i])
                csv += "," + num(p);
            csv += "\n";
        }
    }
    ctx.write("trajectory.csv", csv);

    std::string sweep = "param,value,emission,p_success,relative_change\n";
    for (double eta : d.eta_sweep) {
        const double e = eta == 0.0 ? 0.0 : vstirap::emission_for_eta(eta, d.spec, d.params, d.drive, d.options);
        sweep += fmt::format("eta,{},{},{},0\n", num(eta), num(e), num(link::bell_success(e, d.alpha_setup)));
    }
    if (!d.detuning_sweep_hz.empty()) {
        std::vector<double> detunings;
        for (double hz : d.detuning_sweep_hz)
            detunings.push_back(hz_to_rad(hz));
        for (const auto& p : vstirap::detuning_sensitivity(d.spec, d.params, d.drive, detunings, d.options))
            sweep += fmt::format("atom_detuning_hz,{},{},{},{}\n", num(rad_to_hz(p.detuning_rad_s)), num(p.emission),
                                 num(link::bell_success(p.emission, d.alpha_setup)), num(p.relative_change));
    }
    if (cfg.cavity && cfg.levels && cfg.dressing && cfg.array && cfg.array->design == array::Design::LgChain) {
        const auto coop = build_cooperativity(cfg);
        const auto avg = vstirap::array_average_success(coop.map.eta, d.spec, d.params, d.drive, d.alpha_setup,
                                                        d.eta_grid_points, d.options);
        sweep += fmt::format("array_mean_eta,{},,{},0\n", num(coop.map.mean), num(avg.mean_p_success));
        say(ctx, "array-mean P_s      {:.4f} over {} sites (mean eta {:.3f})", avg.mean_p_success,
            coop.map.eta.size(), coop.map.mean);
    }
    ctx.write("sweep.csv", sweep);

    if (ctx.svg) {
        svg::Plot plot;
        plot.title = "Photon flux at the cavity output";
        plot.x_label = "time (us)";
        plot.y_label = "photon flux (1/us)";
        plot.y2_label = "drive Rabi frequency (MHz)";
        const char* colors[] = {"#d62728", "#1f77b4"};
        for (std::size_t k = 0; k < curves.size(); ++k) {
            const auto& t = curves[k].traj;
            svg::Series flux, drive;
            flux.label = fmt::format("{} ramp, emission {:.3f}", curves[k].name, vstirap::emission_probability(t));
            flux.color = drive.color = colors[k % 2];
            drive.dashed = true;
            drive.secondary_axis = true;
            for (std::size_t i = 0; i < t.times.size(); ++i) {
                flux.x.push_back(t.times[i] * 1e6);
                flux.y.push_back(t.photon_flux[i] * 1e-6);
                drive.x.push_back(t.times[i] * 1e6);
                drive.y.push_back(rad_to_hz(t.drive_rabi_rad_s[i]) * 1e-6);
            }
            plot.series.push_back(flux);
            plot.series.push_back(drive);
        }
        ctx.write("trajectory.svg", plot.render());
    }

    say(ctx, "g/2pi               {:.4g} MHz (g^2 = eta kappa gamma / 4)", rad_to_hz(d.params.coupling_rad_s()) * 1e-6);
    say(ctx, "alpha_interface     {:.4f} (closed form)",
        link::alpha_interface(d.params.eta, d.params.kappa_e_rad_s, d.params.kappa_i_rad_s));
    for (const auto& c : curves) {
        const auto shape = vstirap::photon_shape(c.traj);
        say(ctx, "{:8} ramp      emission {:.4f}, rms width {:.3g} us, trace error {:.2e}, min eigenvalue {:.2e}",
            c.name, vstirap::emission_probability(c.traj), shape.rms_width_s * 1e6, c.traj.trace_error,
            c.traj.min_eigenvalue);
    }
}

const std::vector<std::string>& subcommand_names()
{
    static const std::vector<std::string> names{"spectrum", "coopmap", "syndrome", "bell", "cycle", "vstirap"};
    return names;
}

void run_subcommand(const std::string& name, const DesignConfig& cfg, RunContext& ctx)
{
    if (name == "spectrum")
        run_spectrum(cfg, ctx);
    else if (name == "coopmap")
        run_coopmap(cfg, ctx);
    else if (name == "syndrome")
        run_syndrome(cfg, ctx);
    else if (name == "bell")
        run_bell(cfg, ctx);
    else if (name == "cycle")
        run_cycle(cfg, ctx);
    else if (name == "vstirap")
        run_vstirap(cfg, ctx);
    else
        throw ValidationError("unknown subcommand '" + name + "'");

    // Subcommands may share an output directory, so earlier runs recorded in
    // an existing manifest are kept and the file list is their union.
    nlohmann::json runs = nlohmann::json::array();
    const auto manifest_path = ctx.out_dir / "run.json";
    if (std::filesystem::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        const auto previous = nlohmann::json::parse(in, nullptr, false);
        if (previous.is_object() && previous.contains("runs") && previous["runs"].is_array())
            for (const auto& run : previous["runs"])
                if (run.value("subcommand", "") != name)
                    runs.push_back(run);
    }
    nlohmann::json current;
    current["subcommand"] = name;
    current["config_name"] = cfg.name;
    current["config_hash"] = cfg.hash;
    current["seed"] = ctx.seed ? nlohmann::json(*ctx.seed) : nlohmann::json(nullptr);
    current["timestamp"] = utc_timestamp();
    current["files"] = ctx.files;
    runs.push_back(current);

    std::set<std::string> files{"run.json"};
    for (const auto& run : runs)
        for (const auto& f : run["files"])
            if (std::filesystem::exists(ctx.out_dir / f.get<std::string>()))
                files.insert(f.get<std::string>());

    nlohmann::json manifest;
    manifest["tool"] = "cmm";
    manifest["tool_version"] = kToolVersion;
    manifest["subcommand"] = name;
    manifest["config_name"] = cfg.name;
    manifest["config_hash"] = cfg.hash;
    manifest["seed"] = current["seed"];
    manifest["timestamp"] = current["timestamp"];
    manifest["files"] = files;
    manifest["runs"] = runs;
    manifest["config"] = cfg.canonical;
    ctx.write("run.json", manifest.dump(2) + "\n");
}

} // namespace cmm::app
