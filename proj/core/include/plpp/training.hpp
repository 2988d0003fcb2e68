#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plpp/data.hpp"
#include "plpp/losses.hpp"
#include "plpp/model.hpp"

namespace plpp::training {

enum class Schedule { constant, cosine_decay };
enum class Objective { ce_only, plpp };

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 8;
    double lr = 0.002;
    double momentum = 0.9;
    Schedule schedule = Schedule::cosine_decay;
    std::uint64_t seed = 0;
    Objective objective = Objective::plpp;

    void validate() const;  // throws ParameterError
};

struct StepRecord {
    std::size_t step = 0;
    std::size_t epoch = 0;
    losses::LossBreakdown loss;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    double gap = 0.0;  // train - test
};

struct TrainRecord {
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    model::PromptContext prompt;
    TrainRecord record;
};

// SGD+momentum on V only; deterministic batch order from the seed.
// With objective ce_only, lambda is forced to 0 so the record schema and
// values match a plpp run at lambda = 0 exactly.
TrainResult train_prompts(const data::FewShotTask& task, const model::Model& m,
                          const losses::PLPPConfig& plpp_config,
                          const TrainConfig& train_config);

// Fraction of images whose predicted class (argmax of the cosine/tau
// softmax) equals the label; ties resolve to the lower class index.
double evaluate(const model::PromptContext& prompt, const model::Model& m,
                const model::ImageFeatureBank& bank,
                const std::vector<model::ClassSpec>& classes);

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t worst_row = 0;
    std::size_t worst_col = 0;
    double analytic = 0.0;
    double finite_diff = 0.0;
};

// Analytic dL/dV against central finite differences over every V coordinate.
GradCheckReport grad_check(const model::Model& m, const data::FewShotTask& task,
                           const losses::PLPPConfig& plpp_config, Objective objective,
                           std::uint64_t seed = 7, double h = 1e-5);

// Per-step CSV (loss breakdown schema plus epoch/accuracy columns, filled
// on epoch-final steps), 17 significant digits.
std::string record_to_csv(const TrainRecord& record);

}  // namespace plpp::training
