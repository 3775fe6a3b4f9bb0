#include "vh/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"variable-exponent Hardy space toolkit"};
    app.require_subcommand(1);
    vh::CommandOptions opt;
    int level = 0;
    std::uint64_t seed = 0;
    for (const char* name : {"norm", "decompose", "paraproduct", "verify-czo"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "output directory")->required();
        sub->add_option("--grid-level", level, "override grid.L");
        sub->add_option("--seed", seed, "override corpus.seed");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : vh::ExitConfig;
    }
    for (auto* sub : app.get_subcommands()) {
        opt.command = sub->get_name();
        if (sub->count("--grid-level")) opt.grid_level = level;
        if (sub->count("--seed")) opt.seed = seed;
    }
    return vh::run_command(opt, std::cerr);
}
