#include "cli_common.hpp"
#include "commands.hpp"

#include "gastmix/error.hpp"
#include "gastmix/manifest.hpp"

#include <iostream>

// gastmix: detect guest-nationality references in German hotel reviews and
// aggregate them into per-business composition estimates.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

int main(int argc, char** argv) {
    using namespace gastmix;

    CLI::App app{"guest-nationality analytics for German hotel reviews"};
    app.set_version_flag("--version", std::string("gastmix ") + manifest::kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t global_seed = 0;
    bool global_strict = false;
    app.add_option("--config,-c", config_path, "key=value or JSON defaults, flags win");
    app.add_option("--seed", global_seed, "default seed for all subcommands");
    app.add_flag("--strict", global_strict, "strict ingestion for all subcommands");

    try {
        const auto settings = cli::Settings::from_argv(argc, argv);
        cli::register_corpus_commands(app, settings);
        cli::register_dataset_commands(app, settings);
        cli::register_model_commands(app, settings);
        cli::register_composition_commands(app, settings);
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
