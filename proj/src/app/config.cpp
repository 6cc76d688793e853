#include "cmm/app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace cmm::app {

namespace {

// Reads one mapping node and remembers which keys were consumed so that
// anything left over can be reported as unknown.
class Block {
public:
    Block(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path))
    {
        require(node_.IsMap(), "config block '" + path_ + "' must be a mapping");
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

    template <typename T>
    T get(const std::string& key)
    {
        const YAML::Node value = node_[key];
        require(static_cast<bool>(value), "missing config key '" + where(key) + "'");
        return convert<T>(value, key);
    }

    template <typename T>
    T get_or(const std::string& key, T fallback)
    {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        return get<T>(key);
    }

    Block child(const std::string& key)
    {
        const YAML::Node value = node_[key];
        require(static_cast<bool>(value), "missing config block '" + where(key) + "'");
        used_.insert(key);
        return Block(value, where(key));
    }

    YAML::Node raw(const std::string& key)
    {
        const YAML::Node value = node_[key];
        require(static_cast<bool>(value), "missing config key '" + where(key) + "'");
        used_.insert(key);
        return value;
    }

    void finish() const
    {
        std::vector<std::string> unknown;
        for (const auto& item : node_) {
            const auto key = item.first.as<std::string>();
            if (!used_.count(key))
                unknown.push_back(where(key));
        }
        if (!unknown.empty()) {
            std::string list;
            for (const auto& k : unknown)
                list += (list.empty() ? "" : ", ") + k;
            throw ValidationError("unknown config key(s): " + list);
        }
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    template <typename T>
    T convert(const YAML::Node& value, const std::string& key)
    {
        used_.insert(key);
        try {
            return value.as<T>();
        } catch (const YAML::Exception&) {
            throw ValidationError("config key '" + where(key) + "' has the wrong type");
        }
    }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

std::map<std::string, double> read_branching(Block& block, const std::string& key)
{
    const YAML::Node node = block.raw(key);
    require(node.IsMap(), "'" + block.where(key) + "' must map destinations to probabilities");
    std::map<std::string, double> out;
    for (const auto& item : node) {
        try {
            out[item.first.as<std::string>()] = item.second.as<double>();
        } catch (const YAML::Exception&) {
            throw ValidationError("'" + block.where(key) + "' entries must be numbers");
        }
    }
    return out;
}

CavityBlock read_cavity(Block b)
{
    CavityBlock c;
    c.geometry = optics::CavityGeometry::from_losses(b.get<double>("length_m"), b.get<double>("waist_m"),
                                                     b.get<double>("wavelength_m"), b.get<double>("finesse"),
                                                     b.get<double>("mirror_loss_total"));
    c.family = optics::parse_family(b.get<std::string>("family"));
    c.max_index = b.get<int>("max_index");
    c.tune_equal_spacing = b.get<bool>("tune_equal_spacing");
    c.tune_modes = b.get_or<int>("tune_modes", c.max_index + 1);
    b.finish();
    require(c.max_index >= 0, "cavity.max_index must be non-negative");
    require(c.tune_modes >= 1, "cavity.tune_modes must be positive");
    c.geometry.validate();
    return c;
}

dressing::LevelScheme read_levels(Block b)
{
    dressing::LevelScheme s;
    s.gamma_e_rad_s = hz_to_rad(b.get<double>("gamma_e_hz"));
    s.gamma_f_rad_s = hz_to_rad(b.get<double>("gamma_f_hz"));
    s.branching = read_branching(b, "branching");
    s.cavity_branching = b.get<double>("cavity_branching");
    s.leak_probability = b.get<double>("leak_probability");
    b.finish();
    s.validate();
    return s;
}

DressingBlock read_dressing(Block b)
{
    DressingBlock d;
    d.field.rabi_rad_s = hz_to_rad(b.get<double>("control_rabi_hz"));
    d.field.detuning_rad_s = hz_to_rad(b.get<double>("control_detuning_hz"));
    d.field.intensity_stability = b.get<double>("intensity_stability");
    d.max_shift_hz = b.get<double>("max_shift_hz");
    d.n_fsr = b.get<int>("n_fsr");
    d.control_waist_m = b.get<double>("control_waist_m");
    b.finish();
    d.field.validate();
    require(d.max_shift_hz >= 0.0, "dressing.max_shift_hz must be non-negative");
    require(d.n_fsr >= 1, "dressing.n_fsr must be at least 1");
    require(d.control_waist_m >= 0.0, "dressing.control_waist_m must be non-negative");
    return d;
}

ArrayBlock read_array(Block b)
{
    ArrayBlock a;
    a.design = array::parse_design(b.get<std::string>("design"));
    a.thermal.temperature_k = b.get<double>("temperature_k");
    a.thermal.trap_frequency_rad_s = hz_to_rad(b.get<double>("trap_frequency_hz"));
    if (a.design == array::Design::HgReadout) {
        a.hg.n_transverse = b.get<int>("n_transverse");
        a.hg.atoms_per_column = b.get<int>("atoms_per_column");
        a.hg.registers_per_column = b.get<int>("registers_per_column");
        a.hg.spacing_z_m = b.get<double>("spacing_z_m");
        a.hg.min_spacing_m = b.get<double>("min_spacing_m");
    } else {
        a.lg.n_atoms = b.get<int>("n_atoms");
        a.lg.n_registers = b.get<int>("n_registers");
        a.lg.spacing_z_m = b.get<double>("spacing_z_m");
        a.lg.min_spacing_m = b.get<double>("min_spacing_m");
    }
    b.finish();
    a.thermal.validate();
    return a;
}

SearchBlock read_search(Block b)
{
    SearchBlock s;
    s.n_grid = b.get<std::vector<long>>("n_grid");
    s.base.n_batch = b.get<int>("n_batch_max");
    s.base.n_modes = b.get<int>("n_modes");
    s.base.p_synd = b.get<double>("p_synd");
    s.base.t_query_s = b.get<double>("t_query_s");
    s.base.free_space_time_s = b.get<double>("free_space_time_s");
    s.mc_trials = b.get<long>("mc_trials");
    s.trace_atoms = b.get<long>("trace_atoms");
    b.finish();
    s.base.n_atoms = s.trace_atoms;
    s.base.validate();
    require(!s.n_grid.empty(), "search.n_grid must not be empty");
    require(s.mc_trials >= 0, "search.mc_trials must be non-negative");
    require(s.trace_atoms >= 1, "search.trace_atoms must be positive");
    return s;
}

LinkBlock read_link(Block b)
{
    LinkBlock l;
    l.budget.eta = b.get<double>("eta");
    l.budget.kappa_e_rad_s = hz_to_rad(b.get<double>("kappa_e_hz"));
    l.budget.kappa_i_rad_s = hz_to_rad(b.get<double>("kappa_i_hz"));
    l.budget.alpha_setup = b.get<double>("alpha_setup");
    l.n_modes = b.get<int>("n_modes");
    l.attempt_period_s = b.get<double>("attempt_period_s");
    l.schedule.n_registers = b.get<int>("n_registers");
    l.schedule.atoms_per_register = b.get<int>("atoms_per_register");
    l.schedule.switching_time_s = b.get<double>("switching_time_s");
    l.schedule.photon_window_s = b.get<double>("photon_window_s");
    l.cycle.pairs_needed = b.get<int>("pairs_needed");
    l.cycle.n_modes = l.n_modes;
    l.cycle.t_measure_s = b.get<double>("t_measure_s");
    l.cycle.init_time_s = b.get<double>("init_time_s");
    l.cycle.local_gate_time_s = b.get<double>("local_gate_time_s");
    l.scan_atoms = b.get<int>("scan_atoms");
    l.mean_p_success = b.get<double>("mean_p_success");
    l.free_space_rate_hz = b.get<double>("free_space_rate_hz");
    l.n_comm_qubits = b.get<int>("n_comm_qubits");
    b.finish();
    l.budget.validate();
    l.schedule.validate();
    require(l.n_modes >= 1, "link.n_modes must be at least 1");
    require(l.attempt_period_s > 0.0, "link.attempt_period_s must be positive");
    require(l.mean_p_success >= 0.0 && l.mean_p_success <= 1.0, "link.mean_p_success outside [0, 1]");
    return l;
}

vstirap::DriveProfile read_drive(Block b)
{
    vstirap::DriveProfile d;
    const auto shape = b.get<std::string>("shape");
    d.duration_s = b.get<double>("duration_s");
    if (shape == "linear_ramp") {
        d.shape = vstirap::DriveShape::LinearRamp;
        d.slope_rad_s2 = b.get<double>("slope_rad_s2");
        d.peak_rabi_rad_s = hz_to_rad(b.get<double>("peak_rabi_hz"));
    } else if (shape == "table") {
        d.shape = vstirap::DriveShape::Table;
        for (const auto& knot : b.get<std::vector<std::vector<double>>>("table_s_hz")) {
            require(knot.size() == 2, "drive table knots are [time_s, rabi_hz] pairs");
            d.table.emplace_back(knot[0], hz_to_rad(knot[1]));
        }
    } else {
        throw ValidationError("unknown drive shape '" + shape + "' (expected linear_ramp or table)");
    }
    b.finish();
    d.validate();
    return d;
}

DynamicsBlock read_dynamics(Block b)
{
    DynamicsBlock d;
    d.spec.fock_cutoff = b.get<int>("fock_cutoff");
    d.spec.polarization_resolved = b.get<bool>("polarization_resolved");
    d.params.eta = b.get<double>("eta");
    d.params.kappa_e_rad_s = hz_to_rad(b.get<double>("kappa_e_hz"));
    d.params.kappa_i_rad_s = hz_to_rad(b.get<double>("kappa_i_hz"));
    d.params.gamma_rad_s = hz_to_rad(b.get<double>("gamma_hz"));
    d.params.atom_detuning_rad_s = hz_to_rad(b.get<double>("atom_detuning_hz"));
    d.params.cavity_detuning_rad_s = hz_to_rad(b.get<double>("cavity_detuning_hz"));
    d.params.cavity_weight_q0 = b.get<double>("cavity_weight_q0");
    d.params.branching = read_branching(b, "branching");
    d.drive = read_drive(b.child("drive"));
    d.compare_slope_rad_s2 = b.get<double>("compare_slope_rad_s2");
    d.alpha_setup = b.get<double>("alpha_setup");
    d.eta_sweep = b.get<std::vector<double>>("eta_sweep");
    d.detuning_sweep_hz = b.get<std::vector<double>>("detuning_sweep_hz");
    d.eta_grid_points = b.get<int>("eta_grid_points");
    d.options.samples = b.get<int>("samples");
    d.options.rel_tol = b.get<double>("rel_tol");
    d.options.abs_tol = b.get<double>("abs_tol");
    d.options.max_rhs_evaluations = b.get_or<long>("max_rhs_evaluations", d.options.max_rhs_evaluations);
    b.finish();
    d.spec.validate();
    d.params.validate();
    require(d.compare_slope_rad_s2 >= 0.0, "dynamics.compare_slope_rad_s2 must be non-negative");
    require(d.alpha_setup >= 0.0 && d.alpha_setup <= 1.0, "dynamics.alpha_setup outside [0, 1]");
    require(d.eta_grid_points >= 20, "dynamics.eta_grid_points must be at least 20");
    require(d.options.samples >= 2, "dynamics.samples must be at least 2");
    require(d.options.max_rhs_evaluations >= 1, "dynamics.max_rhs_evaluations must be positive");
    return d;
}

OutputBlock read_output(Block b)
{
    OutputBlock o;
    o.directory = b.get_or<std::string>("directory", o.directory);
    const auto formats = b.get_or<std::vector<std::string>>("formats", {"csv", "svg"});
    if (b.has("seed"))
        o.seed = b.get<std::uint64_t>("seed");
    b.finish();
    o.svg = false;
    bool csv = false;
    for (const auto& f : formats) {
        if (f == "svg")
            o.svg = true;
        else if (f == "csv")
            csv = true;
        else
            throw ValidationError("unknown output format '" + f + "' (expected csv or svg)");
    }
    require(csv, "output.formats must include csv");
    return o;
}

void apply_override(YAML::Node node, const Override& o, std::size_t depth)
{
    const auto& key = o.path[depth];
    if (depth + 1 == o.path.size()) {
        node[key] = YAML::Load(o.value);
        return;
    }
    YAML::Node child = node[key];
    require(child.IsDefined() && child.IsMap(),
            "override path '" + key + "' does not name an existing config block");
    apply_override(child, o, depth + 1);
}

} // namespace

Override parse_override(const std::string& text)
{
    const auto eq = text.find('=');
    require(eq != std::string::npos && eq > 0, "override '" + text + "' must look like key.path=value");
    Override o;
    std::stringstream path(text.substr(0, eq));
    for (std::string part; std::getline(path, part, '.');) {
        require(!part.empty(), "override '" + text + "' has an empty path component");
        o.path.push_back(part);
    }
    o.value = text.substr(eq + 1);
    return o;
}

nlohmann::json to_json(const YAML::Node& node)
{
    switch (node.Type()) {
    case YAML::NodeType::Map: {
        nlohmann::json out = nlohmann::json::object();
        for (const auto& item : node)
            out[item.first.as<std::string>()] = to_json(item.second);
        return out;
    }
    case YAML::NodeType::Sequence: {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& item : node)
            out.push_back(to_json(item));
        return out;
    }
    case YAML::NodeType::Scalar: {
        const auto text = node.Scalar();
        double real = 0.0;
        bool flag = false;
        // 60000 and 6.0e4 must hash alike, so numbers are normalized by value.
        if (node.Tag() != "!" && YAML::convert<double>::decode(node, real)) {
            if (std::isfinite(real) && std::trunc(real) == real && std::abs(real) < 0x1p53)
                return static_cast<long long>(real);
            return real;
        }
        if (node.Tag() != "!" && YAML::convert<bool>::decode(node, flag))
            return flag;
        return text;
    }
    default:
        return nullptr;
    }
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

DesignConfig parse_config(const YAML::Node& root)
{
    require(root.IsMap(), "config root must be a mapping");
    Block top(root, "");
    DesignConfig cfg;
    cfg.name = top.get_or<std::string>("name", "unnamed");
    // Every block is parsed up front so unknown keys fail before any computation.
    if (top.has("cavity"))
        cfg.cavity = read_cavity(top.child("cavity"));
    if (top.has("levels"))
        cfg.levels = read_levels(top.child("levels"));
    if (top.has("dressing"))
        cfg.dressing = read_dressing(top.child("dressing"));
    if (top.has("array"))
        cfg.array = read_array(top.child("array"));
    if (top.has("search"))
        cfg.search = read_search(top.child("search"));
    if (top.has("link"))
        cfg.link = read_link(top.child("link"));
    if (top.has("dynamics"))
        cfg.dynamics = read_dynamics(top.child("dynamics"));
    if (top.has("output"))
        cfg.output = read_output(top.child("output"));
    top.finish();

    cfg.canonical = to_json(root);
    cfg.hash = fmt::format("{:016x}", fnv1a64(cfg.canonical.dump()));
    return cfg;
}

DesignConfig parse_config_text(const std::string& text, const std::vector<Override>& overrides)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ValidationError(std::string("config is not valid YAML: ") + e.what());
    }
    for (const auto& o : overrides) {
        try {
            apply_override(root, o, 0);
        } catch (const YAML::Exception& e) {
            throw ValidationError(std::string("override value is not valid YAML: ") + e.what());
        }
    }
    return parse_config(root);
}

DesignConfig load_config(const std::filesystem::path& path, const std::vector<Override>& overrides)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), overrides);
}

} // namespace cmm::app
