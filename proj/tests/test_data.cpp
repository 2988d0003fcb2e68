#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "plpp/data.hpp"
#include "plpp/numerics.hpp"

using namespace plpp;
using namespace plpp::data;

namespace {

SyntheticTaskSpec small_spec(std::uint64_t seed = 1) {
    SyntheticTaskSpec s;
    s.num_classes = 10;
    s.shots_per_class = 4;
    s.test_per_class = 6;
    s.joint_dim = 8;
    s.noise_sigma = 0.5;
    s.seed = seed;
    return s;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("generate_task cardinality and unit norms") {
    auto task = generate_task(small_spec());
    CHECK(task.train.features.rows() == 40);
    CHECK(task.test.features.rows() == 60);
    CHECK(task.classes.size() == 10);
    for (std::size_t r = 0; r < task.train.features.rows(); ++r) {
        CHECK(std::abs(numerics::l2_norm(task.train.features.row(r)) - 1.0) < 1e-9);
        CHECK(task.train.labels[r] < 10);
    }
    // distinct class tokens
    for (std::size_t i = 0; i < task.classes.size(); ++i) {
        for (std::size_t j = i + 1; j < task.classes.size(); ++j) {
            CHECK(task.classes[i].class_token != task.classes[j].class_token);
        }
    }
}

TEST_CASE("noise_sigma=0 makes every image equal to its class prototype") {
    SyntheticTaskSpec s = small_spec();
    s.noise_sigma = 0.0;
    auto task = generate_task(s);
    for (std::size_t c = 0; c < s.num_classes; ++c) {
        auto first = task.train.features.row(c * s.shots_per_class);
        for (std::size_t k = 1; k < s.shots_per_class; ++k) {
            auto other = task.train.features.row(c * s.shots_per_class + k);
            for (std::size_t d = 0; d < s.joint_dim; ++d) CHECK(other[d] == first[d]);
        }
    }
}

TEST_CASE("same seed gives byte-identical task file") {
    std::string p1 = temp_path("plpp_task_a.txt");
    std::string p2 = temp_path("plpp_task_b.txt");
    save_task(generate_task(small_spec(9)), p1);
    save_task(generate_task(small_spec(9)), p2);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(!slurp(p1).empty());
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("task file round-trip is bit-exact") {
    auto task = generate_task(small_spec(33));
    task = base_novel_split(std::move(task), 0.5, 4);
    std::string path = temp_path("plpp_task_roundtrip.txt");
    save_task(task, path);
    auto back = load_task(path);
    CHECK(back.spec == task.spec);
    CHECK(back.train.features == task.train.features);
    CHECK(back.test.features == task.test.features);
    CHECK(back.train.labels == task.train.labels);
    CHECK(back.test.labels == task.test.labels);
    REQUIRE(back.partition.has_value());
    CHECK(back.partition->base == task.partition->base);
    CHECK(back.partition->novel == task.partition->novel);
    REQUIRE(back.classes.size() == task.classes.size());
    for (std::size_t i = 0; i < task.classes.size(); ++i) {
        CHECK(back.classes[i].class_token == task.classes[i].class_token);
        CHECK(back.classes[i].name == task.classes[i].name);
    }
    // save -> load -> save reproduces the same bytes
    std::string path2 = temp_path("plpp_task_roundtrip2.txt");
    save_task(back, path2);
    CHECK(slurp(path) == slurp(path2));
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

TEST_CASE("base_novel_split partition properties") {
    auto task = generate_task(small_spec());
    auto split = base_novel_split(task, 0.5, 7);
    REQUIRE(split.partition.has_value());
    CHECK(split.partition->base.size() == 5);
    CHECK(split.partition->novel.size() == 5);
    std::vector<std::size_t> all = split.partition->base;
    all.insert(all.end(), split.partition->novel.begin(), split.partition->novel.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(10);
    for (std::size_t i = 0; i < 10; ++i) expect[i] = i;
    CHECK(all == expect);

    auto again = base_novel_split(task, 0.5, 7);
    CHECK(again.partition->base == split.partition->base);

    CHECK_THROWS_AS(base_novel_split(task, 0.0, 7), ParameterError);
    CHECK_THROWS_AS(base_novel_split(task, 1.0, 7), ParameterError);
    SyntheticTaskSpec two = small_spec();
    two.num_classes = 2;
    CHECK_THROWS_AS(base_novel_split(generate_task(two), 0.9, 7), ParameterError);
}

TEST_CASE("harmonic mean reproduces reference pairs and bounds") {
    CHECK(harmonic_mean(82.69, 63.22) == doctest::Approx(71.66).epsilon(0.00007));
    CHECK(harmonic_mean(84.32, 76.70) == doctest::Approx(80.33).epsilon(0.00007));
    CHECK(harmonic_mean(55.5, 55.5) == doctest::Approx(55.5).epsilon(1e-12));
    CHECK_THROWS_AS(harmonic_mean(0.0, 0.0), DegenerateInputError);
    CHECK_THROWS_AS(harmonic_mean(-1.0, 5.0), ParameterError);

    for (auto [a, b] : {std::pair{10.0, 90.0}, {33.0, 44.0}, {1.0, 99.0}}) {
        double h = harmonic_mean(a, b);
        CHECK(h >= std::min(a, b));
        CHECK(h <= std::max(a, b));
    }
}

TEST_CASE("spec validation") {
    SyntheticTaskSpec s = small_spec();
    s.num_classes = 1;
    CHECK_THROWS_AS(generate_task(s), ParameterError);
    s = small_spec();
    s.shots_per_class = 0;
    CHECK_THROWS_AS(generate_task(s), ParameterError);
    s = small_spec();
    s.noise_sigma = -0.1;
    CHECK_THROWS_AS(generate_task(s), ParameterError);
}

TEST_CASE("load_task rejects malformed files") {
    std::string path = temp_path("plpp_task_bad.txt");
    {
        std::ofstream f(path);
        f << "not a task file\n";
    }
    CHECK_THROWS_AS(load_task(path), IoError);
    CHECK_THROWS_AS(load_task("/nonexistent/task.txt"), IoError);
    std::filesystem::remove(path);
}
