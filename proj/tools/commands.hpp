#ifndef GASTMIX_COMMANDS_HPP
#define GASTMIX_COMMANDS_HPP

#include "cli_common.hpp"

namespace gastmix::cli {

void register_corpus_commands(CLI::App& app, const Settings& cfg);
void register_dataset_commands(CLI::App& app, const Settings& cfg);
void register_model_commands(CLI::App& app, const Settings& cfg);
void register_composition_commands(CLI::App& app, const Settings& cfg);

} // namespace gastmix::cli

#endif
