#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "plpp/numerics.hpp"

using namespace plpp;
using namespace plpp::numerics;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Matrix m(r, c);
    for (double& x : m.values()) x = dist(rng);
    return m;
}

// independent triple-loop oracle
Matrix matmul_oracle(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j)
            for (std::size_t t = 0; t < a.cols(); ++t)
                out.at(i, j) += a.at(i, t) * b.at(t, j);
    return out;
}

}  // namespace

TEST_CASE("matmul identity and hand arithmetic") {
    Matrix i2 = Matrix::identity(2);
    CHECK(matmul(i2, i2) == i2);

    Matrix a{{1, 2}, {3, 4}};
    Matrix b{{1}, {1}};
    Matrix expect{{3}, {7}};
    CHECK(matmul(a, b) == expect);
}

TEST_CASE("matmul matches brute-force oracle exactly") {
    std::mt19937_64 rng(11);
    Matrix a = random_matrix(rng, 8, 8);
    Matrix b = random_matrix(rng, 8, 8);
    CHECK(matmul(a, b) == matmul_oracle(a, b));
}

TEST_CASE("matmul shape mismatch throws") {
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), DimensionError);
}

TEST_CASE("row_softmax symmetry cases") {
    Matrix m{{0, 0}};
    Matrix p = row_softmax(m, 1.0);
    CHECK(p.at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.at(0, 1) == doctest::Approx(0.5).epsilon(1e-15));

    Matrix m3{{4.2, 4.2, 4.2}};
    Matrix p3 = row_softmax(m3, 0.37);
    for (double x : p3.values()) CHECK(x == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("row_softmax against direct exp/sum oracle") {
    Matrix m{{1, 2, 3}};
    Matrix p = row_softmax(m, 1.0);
    double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(std::abs(p.at(0, c) - std::exp(1.0 + c) / z) < 1e-12);
    }
}

TEST_CASE("row_softmax rows sum to 1 and entries in (0,1]") {
    std::mt19937_64 rng(5);
    Matrix m = random_matrix(rng, 20, 33, 10.0);
    Matrix p = row_softmax(m, 0.7);
    for (std::size_t r = 0; r < p.rows(); ++r) {
        double s = std::accumulate(p.row(r).begin(), p.row(r).end(), 0.0);
        CHECK(std::abs(s - 1.0) < 1e-12);
        for (double x : p.row(r)) {
            CHECK(x > 0.0);
            CHECK(x <= 1.0);
        }
    }
}

TEST_CASE("row_softmax rejects non-positive temperature") {
    CHECK_THROWS_AS(row_softmax(Matrix(1, 2), 0.0), ParameterError);
    CHECK_THROWS_AS(row_softmax(Matrix(1, 2), -1.0), ParameterError);
}

TEST_CASE("cosine similarity basic geometry") {
    Matrix a{{1, 0, 0}, {0, 2, 0}};
    Matrix b{{1, 0, 0}, {0, 0, 5}};
    Matrix s = cosine_similarity_matrix(a, b);
    CHECK(s.at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.at(0, 1) == doctest::Approx(0.0));
    CHECK(s.at(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("cosine similarity against per-pair oracle, entries bounded") {
    std::mt19937_64 rng(17);
    Matrix a = random_matrix(rng, 4, 3);
    Matrix b = random_matrix(rng, 5, 3);
    Matrix s = cosine_similarity_matrix(a, b);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            double dot = 0.0;
            for (std::size_t t = 0; t < 3; ++t) dot += a.at(i, t) * b.at(j, t);
            double expect = dot / (l2_norm(a.row(i)) * l2_norm(b.row(j)));
            CHECK(std::abs(s.at(i, j) - expect) < 1e-12);
            CHECK(s.at(i, j) >= -1.0 - 1e-12);
            CHECK(s.at(i, j) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("cosine similarity rejects zero-norm rows") {
    Matrix a{{0, 0, 0}};
    Matrix b{{1, 0, 0}};
    CHECK_THROWS_AS(cosine_similarity_matrix(a, b), DegenerateInputError);
    CHECK_THROWS_AS(cosine_similarity_matrix(b, a), DegenerateInputError);
}

TEST_CASE("topk_indices ordering and tie-break") {
    std::vector<double> v{0.4, 0.3, 0.2, 0.1};
    CHECK(topk_indices(v, 2) == std::vector<std::size_t>{0, 1});

    std::vector<double> tie{0.1, 0.4, 0.4};
    CHECK(topk_indices(tie, 2) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("topk_indices against full-sort oracle") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(100);
    for (double& x : v) x = dist(rng);
    auto idx = topk_indices(v, 100);
    std::vector<std::size_t> oracle(100);
    std::iota(oracle.begin(), oracle.end(), std::size_t{0});
    std::stable_sort(oracle.begin(), oracle.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    CHECK(idx == oracle);
    CHECK(topk_indices(v, 7) == std::vector<std::size_t>(oracle.begin(), oracle.begin() + 7));
}

TEST_CASE("topk_indices range validation") {
    std::vector<double> v{1.0, 2.0};
    CHECK_THROWS_AS(topk_indices(v, 0), ParameterError);
    CHECK_THROWS_AS(topk_indices(v, 3), ParameterError);
}

TEST_CASE("gather by definition, empty index list, errors") {
    std::vector<double> v{10, 20, 30};
    std::vector<std::size_t> idx{2, 0};
    CHECK(gather(v, idx) == std::vector<double>{30, 10});
    CHECK(gather(v, std::vector<std::size_t>{}).empty());
    std::vector<std::size_t> bad{3};
    CHECK_THROWS_AS(gather(v, bad), ParameterError);
}

TEST_CASE("topk + gather with k=n recovers a sorted copy") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(50);
    for (double& x : v) x = dist(rng);
    auto idx = topk_indices(v, v.size());
    auto g = gather(v, idx);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    CHECK(g == sorted);
    // permutation: gathered multiset equals the original
    std::vector<double> back = g;
    std::sort(back.begin(), back.end());
    std::vector<double> orig = v;
    std::sort(orig.begin(), orig.end());
    CHECK(back == orig);
}

TEST_CASE("operations are bit-deterministic") {
    std::mt19937_64 rng(31);
    Matrix a = random_matrix(rng, 6, 7);
    Matrix b = random_matrix(rng, 7, 4);
    CHECK(matmul(a, b) == matmul(a, b));
    CHECK(row_softmax(a, 0.3) == row_softmax(a, 0.3));
    CHECK(cosine_similarity_matrix(a, a) == cosine_similarity_matrix(a, a));
}
