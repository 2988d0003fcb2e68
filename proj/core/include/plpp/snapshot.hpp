#pragma once

#include <string>
#include <utility>
#include <vector>

#include "plpp/model.hpp"

namespace plpp::snapshot {

// Versioned textual weight container: config echo plus named matrices.
// Doubles are written with 17 significant digits so round-trips are bit-exact.
struct Snapshot {
    model::ModelConfig config;
    std::vector<std::pair<std::string, Matrix>> matrices;

    const Matrix* find(const std::string& name) const;
};

void save(const Snapshot& snap, const std::string& path);
Snapshot load(const std::string& path);

Snapshot snapshot_model(const model::Model& m);
model::Model model_from_snapshot(const Snapshot& snap);

Snapshot snapshot_prompt(const model::ModelConfig& config, const model::PromptContext& prompt);
model::PromptContext prompt_from_snapshot(const Snapshot& snap);

}  // namespace plpp::snapshot
