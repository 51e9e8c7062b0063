#pragma once

#include <string>
#include <vector>

#include "pairsim/io.hpp"

namespace pairsim {

// A named configuration shipped with the binary. `config_text` is a complete
// config file (same format load_config reads), so a recipe run and a config
// run go through identical code.
struct RecipeInfo {
  std::string name;
  std::string description;
  std::string config_text;
};

const std::vector<RecipeInfo>& recipes();
const RecipeInfo* find_recipe(const std::string& name);  // nullptr when absent

// Dispatches on cfg.experiment, runs it, and writes manifest.json,
// summary.json and the experiment's CSV files into cfg.output_dir.
// Returns the list of paths written (nothing is written before the run
// finishes, so a failed run leaves no partial outputs).
std::vector<std::string> run_experiment(const ExperimentConfig& cfg);

}  // namespace pairsim
