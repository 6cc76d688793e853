#pragma once

#include "cmm/array.hpp"
#include "cmm/dressing.hpp"
#include "cmm/link.hpp"
#include "cmm/optics.hpp"
#include "cmm/syndrome.hpp"
#include "cmm/vstirap.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace YAML {
class Node;
}

namespace cmm::app {

struct CavityBlock {
    optics::CavityGeometry geometry;
    bool tune_equal_spacing = false;
    optics::ModeFamily family = optics::ModeFamily::HermiteGauss;
    int max_index = 0;
    /// Number of equally spaced modes to tune for (max_index + 1 by default).
    int tune_modes = 0;
};

struct DressingBlock {
    dressing::DressingField field;
    double max_shift_hz = 0.0;
    int n_fsr = 1;
    double control_waist_m = 0.0;   // 0 disables crosstalk exclusion
};

struct ArrayBlock {
    array::Design design = array::Design::HgReadout;
    array::HgLayoutOptions hg;
    array::LgChainOptions lg;
    array::ThermalState thermal;
};

struct SearchBlock {
    syndrome::SearchConfig base;
    std::vector<long> n_grid;
    long mc_trials = 0;
    long trace_atoms = 0;
};

struct LinkBlock {
    link::LinkBudget budget;
    int n_modes = 1;
    double attempt_period_s = 0.0;
    link::AttemptSchedule schedule;
    link::CycleInputs cycle;
    int scan_atoms = 0;
    double mean_p_success = 0.0;
    double free_space_rate_hz = 0.0;
    int n_comm_qubits = 0;
};

struct DynamicsBlock {
    vstirap::HilbertSpec spec;
    vstirap::DynamicsParams params;
    vstirap::DriveProfile drive;
    double compare_slope_rad_s2 = 0.0;   // second curve; 0 disables it
    double alpha_setup = 0.75;
    std::vector<double> eta_sweep;
    std::vector<double> detuning_sweep_hz;
    int eta_grid_points = 24;
    vstirap::EvolveOptions options;
};

struct OutputBlock {
    std::string directory = "out";
    bool svg = true;
    std::optional<std::uint64_t> seed;
};

struct DesignConfig {
    std::string name;
    std::optional<CavityBlock> cavity;
    std::optional<dressing::LevelScheme> levels;
    std::optional<DressingBlock> dressing;
    std::optional<ArrayBlock> array;
    std::optional<SearchBlock> search;
    std::optional<LinkBlock> link;
    std::optional<DynamicsBlock> dynamics;
    OutputBlock output;

    nlohmann::json canonical;   // effective configuration, keys sorted
    std::string hash;           // FNV-1a of the canonical dump, hex
};

/// `key.path=value` overrides applied to the document before validation.
struct Override {
    std::vector<std::string> path;
    std::string value;
};

Override parse_override(const std::string& text);

DesignConfig parse_config(const YAML::Node& root);
DesignConfig parse_config_text(const std::string& text, const std::vector<Override>& overrides = {});
DesignConfig load_config(const std::filesystem::path& path, const std::vector<Override>& overrides = {});

std::uint64_t fnv1a64(const std::string& bytes);
nlohmann::json to_json(const YAML::Node& node);

} // namespace cmm::app
