#pragma once

#include "cmm/app/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cmm::app {

inline constexpr const char* kToolVersion = "1.0.0";

struct RunContext {
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
    bool svg = true;
    std::ostream* log = nullptr;          // human-readable breakdown; may be null
    std::vector<std::string> files;       // relative to out_dir, in emission order

    void write(const std::string& name, const std::string& contents);
};

/// The geometry actually used: tuned for equal spacing when the config asks.
optics::CavityGeometry effective_geometry(const CavityBlock& cavity);

/// Exclusion band from the control beam on the nearest neighbour at the maximum shift.
double exclusion_band_hz(const DesignConfig& cfg);

struct CooperativityResult {
    optics::CavityGeometry geometry;
    array::ArrayLayout layout;
    dressing::DressedState dressed;
    array::CooperativityMap map;
};

CooperativityResult build_cooperativity(const DesignConfig& cfg);

void run_spectrum(const DesignConfig& cfg, RunContext& ctx);
void run_coopmap(const DesignConfig& cfg, RunContext& ctx);
void run_syndrome(const DesignConfig& cfg, RunContext& ctx);
void run_bell(const DesignConfig& cfg, RunContext& ctx);
void run_cycle(const DesignConfig& cfg, RunContext& ctx);
void run_vstirap(const DesignConfig& cfg, RunContext& ctx);

/// Dispatches by name and writes run.json listing every emitted file.
void run_subcommand(const std::string& name, const DesignConfig& cfg, RunContext& ctx);

const std::vector<std::string>& subcommand_names();

} // namespace cmm::app
