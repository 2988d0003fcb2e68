#include <benchmark/benchmark.h>

#include <random>

#include "plpp/data.hpp"
#include "plpp/losses.hpp"
#include "plpp/model.hpp"
#include "plpp/numerics.hpp"

using namespace plpp;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(r, c);
    for (double& x : m.values()) x = dist(rng);
    return m;
}

model::Model bench_model(std::size_t vocab, std::size_t d) {
    model::ModelConfig c;
    c.vocab_size = vocab;
    c.embed_dim = d;
    c.joint_dim = 16;
    c.seed = 1;
    return model::init_model(c);
}

void BM_matmul(benchmark::State& state) {
    std::mt19937_64 rng(1);
    auto n = static_cast<std::size_t>(state.range(0));
    Matrix a = random_matrix(rng, n, n);
    Matrix b = random_matrix(rng, n, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(numerics::matmul(a, b));
    }
}
BENCHMARK(BM_matmul)->Arg(32)->Arg(128);

void BM_row_softmax(benchmark::State& state) {
    std::mt19937_64 rng(2);
    Matrix m = random_matrix(rng, 4, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(numerics::row_softmax(m, 1.0));
    }
}
BENCHMARK(BM_row_softmax)->Arg(256)->Arg(4096);

void BM_topk_pair(benchmark::State& state) {
    std::mt19937_64 rng(3);
    auto vocab = static_cast<std::size_t>(state.range(0));
    losses::TokenDistribution q{numerics::row_softmax(random_matrix(rng, 4, vocab), 1.0)};
    losses::TokenDistribution p{numerics::row_softmax(random_matrix(rng, 4, vocab), 1.0)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(losses::topk_pair(q, p, 5, losses::TopKSource::from_q));
    }
}
BENCHMARK(BM_topk_pair)->Arg(256)->Arg(4096);

void BM_encode_text(benchmark::State& state) {
    auto m = bench_model(256, static_cast<std::size_t>(state.range(0)));
    std::mt19937_64 rng(4);
    Matrix v = random_matrix(rng, m.config.prompt_len, m.config.embed_dim);
    model::ClassSpec cls{0, 1, "c"};
    for (auto _ : state) {
        auto enc = model::encode_text(m, model::build_prompt_sequence(m, ad::constant(v), cls));
        benchmark::DoNotOptimize(enc.feature->value);
    }
}
BENCHMARK(BM_encode_text)->Arg(32)->Arg(64);

void BM_objective_step(benchmark::State& state) {
    auto m = bench_model(64, 16);
    data::SyntheticTaskSpec spec;
    spec.num_classes = static_cast<std::size_t>(state.range(0));
    spec.shots_per_class = 2;
    spec.test_per_class = 1;
    spec.joint_dim = 16;
    spec.seed = 5;
    auto task = data::generate_task(spec);
    std::mt19937_64 rng(6);
    Matrix v = random_matrix(rng, m.config.prompt_len, m.config.embed_dim);
    Matrix images(8, 16);
    std::vector<std::size_t> labels;
    for (std::size_t r = 0; r < 8; ++r) {
        std::copy(task.train.features.row(r).begin(), task.train.features.row(r).end(),
                  images.row(r).begin());
        labels.push_back(task.train.labels[r]);
    }
    losses::PLPPConfig pc;
    for (auto _ : state) {
        auto obj = losses::build_objective(m, ad::parameter(v, "prompt.V"), task.classes,
                                           images, labels, pc);
        auto grads = ad::backward(obj.loss);
        benchmark::DoNotOptimize(grads);
    }
}
BENCHMARK(BM_objective_step)->Arg(5)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
