#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "plpp/autodiff.hpp"
#include "plpp/errors.hpp"

using namespace plpp;
namespace ad = plpp::ad;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Matrix m(r, c);
    for (double& x : m.values()) x = dist(rng);
    return m;
}

// Central finite differences of a scalar-valued graph builder, checked
// elementwise against the analytic gradient.
void check_gradient(const Matrix& x0,
                    const std::function<ad::Var(const ad::Var&)>& build,
                    double tol = 1e-5, double h = 1e-6) {
    ad::Var p = ad::parameter(x0, "x");
    auto grads = ad::backward(build(p));
    REQUIRE(grads.size() == 1);
    const Matrix& analytic = grads[0].gradient;
    for (std::size_t i = 0; i < x0.size(); ++i) {
        Matrix xp = x0, xm = x0;
        xp.values()[i] += h;
        xm.values()[i] -= h;
        double fp = build(ad::constant(xp))->value.at(0, 0);
        double fm = build(ad::constant(xm))->value.at(0, 0);
        double fd = (fp - fm) / (2.0 * h);
        double rel = std::abs(analytic.values()[i] - fd) / std::max(std::abs(fd), 1e-8);
        CHECK(rel < tol);
    }
}

}  // namespace

TEST_CASE("backward of sum(W) is all ones") {
    Matrix w{{1, 2}, {3, 4}};
    ad::Var p = ad::parameter(w, "W");
    auto grads = ad::backward(ad::sum_all(p));
    REQUIRE(grads.size() == 1);
    CHECK(grads[0].param_id == "W");
    for (double g : grads[0].gradient.values()) CHECK(g == 1.0);
}

TEST_CASE("backward of half squared norm equals W") {
    Matrix w{{0.5, -1.25}, {2.0, 3.5}};
    ad::Var p = ad::parameter(w, "W");
    ad::Var loss = ad::scale(ad::sum_all(ad::mul(p, p)), 0.5);
    auto grads = ad::backward(loss);
    REQUIRE(grads.size() == 1);
    CHECK(grads[0].gradient == w);
}

TEST_CASE("non-scalar loss is a contract error") {
    ad::Var p = ad::parameter(Matrix(2, 2), "W");
    CHECK_THROWS_AS(ad::backward(p), ContractError);
}

TEST_CASE("frozen inputs receive no gradient record") {
    ad::Var c = ad::constant(Matrix{{1, 2}});
    ad::Var p = ad::parameter(Matrix{{3, 4}}, "W");
    auto grads = ad::backward(ad::sum_all(ad::mul(c, p)));
    REQUIRE(grads.size() == 1);
    CHECK(grads[0].param_id == "W");
    CHECK(grads[0].gradient == Matrix{{1, 2}});
}

TEST_CASE("gradient of every primitive matches finite differences") {
    std::mt19937_64 rng(101);
    Matrix x = random_matrix(rng, 3, 4, 2.0);
    Matrix other = random_matrix(rng, 3, 4, 2.0);
    Matrix right = random_matrix(rng, 4, 5, 2.0);

    SUBCASE("add/sub/mul/scale") {
        check_gradient(x, [&](const ad::Var& v) {
            ad::Var o = ad::constant(other);
            return ad::sum_all(ad::mul(ad::add(v, o), ad::sub(ad::scale(v, 1.7), o)));
        });
    }
    SUBCASE("matmul both sides") {
        check_gradient(x, [&](const ad::Var& v) {
            return ad::sum_all(ad::mul(ad::matmul(v, ad::constant(right)),
                                       ad::matmul(v, ad::constant(right))));
        });
        Matrix sq = random_matrix(rng, 4, 4, 1.0);
        check_gradient(sq, [&](const ad::Var& v) {
            return ad::sum_all(ad::matmul(ad::matmul(v, v), v));
        });
    }
    SUBCASE("transpose, slices, concats, entry") {
        check_gradient(x, [&](const ad::Var& v) {
            ad::Var t = ad::transpose(v);
            ad::Var joined = ad::concat_rows({ad::slice_rows(v, 0, 2), ad::slice_rows(v, 1, 2)});
            ad::Var cols = ad::concat_cols({ad::slice_cols(v, 0, 2), ad::slice_cols(v, 1, 3)});
            return ad::add(ad::add(ad::sum_all(ad::mul(t, t)), ad::sum_all(ad::mul(joined, joined))),
                           ad::add(ad::sum_all(cols), ad::entry(v, 2, 3)));
        });
    }
    SUBCASE("row_softmax plain and causal") {
        check_gradient(x, [&](const ad::Var& v) {
            return ad::sum_all(ad::mul(ad::row_softmax(v, 0.7), ad::constant(other)));
        });
        Matrix sq = random_matrix(rng, 4, 4, 2.0);
        Matrix sel = random_matrix(rng, 4, 4, 1.0);
        check_gradient(sq, [&](const ad::Var& v) {
            return ad::sum_all(ad::mul(ad::row_softmax(v, 1.0, true), ad::constant(sel)));
        });
    }
    SUBCASE("layer_norm") {
        std::vector<double> gamma{1.1, 0.9, 1.3, 0.7};
        std::vector<double> beta{0.1, -0.2, 0.0, 0.3};
        check_gradient(x, [&](const ad::Var& v) {
            return ad::sum_all(ad::mul(ad::layer_norm(v, gamma, beta), ad::constant(other)));
        });
    }
    SUBCASE("gelu") {
        check_gradient(x, [&](const ad::Var& v) {
            return ad::sum_all(ad::mul(ad::gelu(v), ad::constant(other)));
        });
    }
    SUBCASE("row_l2_normalize") {
        check_gradient(x, [&](const ad::Var& v) {
            return ad::sum_all(ad::mul(ad::row_l2_normalize(v), ad::constant(other)));
        });
    }
    SUBCASE("log_floor and exp") {
        Matrix pos = random_matrix(rng, 3, 4, 1.0);
        for (double& v : pos.values()) v = std::abs(v) + 0.1;
        check_gradient(pos, [&](const ad::Var& v) {
            return ad::sum_all(ad::mul(ad::log_floor(v, 1e-8), ad::constant(other)));
        });
        check_gradient(x, [&](const ad::Var& v) {
            return ad::mean_all(ad::exp_elem(ad::scale(v, 0.5)));
        });
    }
    SUBCASE("gather_per_row and row_renormalize") {
        Matrix pos = random_matrix(rng, 3, 6, 1.0);
        for (double& v : pos.values()) v = std::abs(v) + 0.1;
        std::vector<std::vector<std::size_t>> idx{{0, 2, 5}, {1, 3, 4}, {5, 0, 1}};
        Matrix sel = random_matrix(rng, 3, 3, 1.0);
        check_gradient(pos, [&](const ad::Var& v) {
            return ad::sum_all(ad::mul(ad::row_renormalize(ad::gather_per_row(v, idx)),
                                       ad::constant(sel)));
        });
    }
}

TEST_CASE("parameter used twice accumulates both paths") {
    Matrix w{{2.0, 3.0}};
    ad::Var p = ad::parameter(w, "W");
    // f = sum(W*W) + 2*sum(W) => df/dW = 2W + 2
    ad::Var loss = ad::add(ad::sum_all(ad::mul(p, p)), ad::scale(ad::sum_all(p), 2.0));
    auto grads = ad::backward(loss);
    CHECK(grads[0].gradient == Matrix{{6.0, 8.0}});
}

TEST_CASE("two parameters each get exactly one record") {
    ad::Var a = ad::parameter(Matrix{{1.0}}, "a");
    ad::Var b = ad::parameter(Matrix{{2.0}}, "b");
    auto grads = ad::backward(ad::mul(a, b));
    REQUIRE(grads.size() == 2);
    CHECK(grads[0].param_id != grads[1].param_id);
}
