// Command-line front end: cmm <subcommand> --config <path> --out <dir> [--seed N] [--set key=value ...]

#include "cmm/app/commands.hpp"
#include "cmm/app/config.hpp"

#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <yaml-cpp/exceptions.h>

int main(int argc, char** argv)
{
    CLI::App app{"Cavity-mode multiplexing design calculator"};
    app.set_version_flag("--version", cmm::app::kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;

    const std::map<std::string, std::string> descriptions{
        {"spectrum", "transverse-mode frequency offsets folded into one FSR"},
        {"coopmap", "array layout and per-site cooperativity map"},
        {"syndrome", "syndrome readout time versus array size, with Monte Carlo"},
        {"bell", "remote-entanglement success probability and pair rate"},
        {"cycle", "teleported-CNOT cycle time budget"},
        {"vstirap", "photon generation dynamics, cooperativity and detuning sweeps"},
    };
    for (const auto& name : cmm::app::subcommand_names()) {
        auto* sub = app.add_subcommand(name, descriptions.at(name));
        sub->add_option("--config", config_path, "design config (YAML)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: output.directory)");
        sub->add_option("--seed", seed, "RNG seed for stochastic pipelines (overrides output.seed)");
        sub->add_option("--set", sets, "override a config value, e.g. --set search.p_synd=0");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    try {
        std::vector<cmm::app::Override> overrides;
        for (const auto& s : sets)
            overrides.push_back(cmm::app::parse_override(s));
        const auto cfg = cmm::app::load_config(config_path, overrides);

        cmm::app::RunContext ctx;
        ctx.out_dir = out_dir.empty() ? cfg.output.directory : out_dir;
        ctx.seed = seed ? seed : cfg.output.seed;
        ctx.svg = cfg.output.svg;
        ctx.log = &std::cout;
        std::cout << fmt::format("cmm {} {} (config {}, hash {})\n", name, cfg.name, config_path, cfg.hash);
        cmm::app::run_subcommand(name, cfg, ctx);
        std::cout << fmt::format("wrote {} file(s) to {}\n", ctx.files.size(), ctx.out_dir.string());
        return 0;
    } catch (const cmm::ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const YAML::Exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cmm::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
