#include "commands.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised segmentation of quantitative phase microscopy images"};
    app.require_subcommand(1);

    int exit_code = qpmseg::cli::kExitOk;
    qpmseg::cli::register_segment(app, exit_code);
    qpmseg::cli::register_phantom(app, exit_code);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        // help/version exit cleanly; anything else is a usage/config problem
        return rc == 0 ? 0 : qpmseg::cli::kExitConfig;
    }
    return exit_code;
}
