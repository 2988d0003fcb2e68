#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plpp/model.hpp"

namespace plpp::data {

struct SyntheticTaskSpec {
    std::size_t num_classes = 10;
    std::size_t shots_per_class = 4;
    std::size_t test_per_class = 20;
    std::size_t joint_dim = 16;
    double noise_sigma = 0.5;
    std::uint64_t seed = 0;

    void validate() const;  // throws ParameterError
    bool operator==(const SyntheticTaskSpec&) const = default;
};

struct BaseNovelPartition {
    std::vector<std::size_t> base;   // class ids
    std::vector<std::size_t> novel;  // class ids
};

struct FewShotTask {
    SyntheticTaskSpec spec;
    std::vector<model::ClassSpec> classes;
    model::ImageFeatureBank train;
    model::ImageFeatureBank test;
    std::optional<BaseNovelPartition> partition;
};

// Per class: a unit prototype direction; each image feature is
// normalize(prototype + Normal(0, noise_sigma)). Class tokens are the
// distinct vocab ids 1..K.
FewShotTask generate_task(const SyntheticTaskSpec& spec);

// First ceil(K * base_fraction) classes of a seeded shuffle become base.
FewShotTask base_novel_split(FewShotTask task, double base_fraction, std::uint64_t seed);

// H = 2 * base * novel / (base + novel), in percent.
double harmonic_mean(double base_acc, double novel_acc);

// Line-delimited text container; round-trips bit-exactly.
void save_task(const FewShotTask& task, const std::string& path);
FewShotTask load_task(const std::string& path);

}  // namespace plpp::data
