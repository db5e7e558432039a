// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "CLI11.hpp"
#include "sgfio/cli.hpp"

int main(int argc, char** argv)
{
    namespace cli = sgfio::cli;
    CLI::App app{"sgfio: numerical laboratory for SG Fourier integral operators"};
    app.require_subcommand(1);

    cli::Invocation inv;
    std::string out;
    const char* help[] = {"solve an eikonal equation and check its phase",
                          "multi-product of a chain of phases",
                          "compose two FIOs or a chain of them",
                          "compressed inverse of I_phi",
                          "fundamental solution and Cauchy problem of a hyperbolic system",
                          "certify a phase and check a symbol"};
    for (std::size_t k = 0; k < cli::subcommands().size(); ++k) {
        CLI::App* sc = app.add_subcommand(cli::subcommands()[k], help[k]);
        sc->add_option("--config", inv.config_path, "JSON experiment config")->required();
        sc->add_flag("--serial", inv.serial, "single-threaded deterministic reductions (always the case here)");
        sc->add_option("--out", out, "output directory (SGFIO_OUT takes precedence)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kConfigError;
    }
    inv.subcommand = app.get_subcommands().front()->get_name();
    if (!out.empty()) inv.out = out;
    return cli::run(inv, std::cerr).exit_code;
}
