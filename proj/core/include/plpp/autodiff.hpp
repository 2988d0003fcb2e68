#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "plpp/matrix.hpp"

namespace plpp::ad {

struct Node;
using Var = std::shared_ptr<Node>;

// One gradient per trainable parameter per backward pass.
struct GradRecord {
    std::string param_id;
    Matrix gradient;  // same shape as the parameter
};

// A value in the computation graph. Values are immutable once produced;
// gradients are accumulated during backward().
struct Node {
    Matrix value;
    Matrix grad;
    bool grad_init = false;
    bool requires_grad = false;
    std::string param_id;  // non-empty for trainable parameters only
    std::vector<Var> parents;
    std::function<void(Node&)> backprop;

    void accumulate(const Matrix& g);
};

Var constant(Matrix value);
Var parameter(Matrix value, std::string id);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var scale(const Var& a, double s);
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);

Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(const Var& a, std::size_t r0, std::size_t n);
Var slice_cols(const Var& a, std::size_t c0, std::size_t n);
Var entry(const Var& a, std::size_t r, std::size_t c);  // 1x1 view

// Row-wise softmax of value/temperature. With causal=true, entries with
// col > row are masked out (zero probability, no gradient).
Var row_softmax(const Var& a, double temperature, bool causal = false);

// Per-row layer normalization with frozen affine parameters.
Var layer_norm(const Var& a, const std::vector<double>& gamma,
               const std::vector<double>& beta, double eps = 1e-5);

Var gelu(const Var& a);
Var row_l2_normalize(const Var& a);
Var log_floor(const Var& a, double eps);   // ln(max(x, eps))
Var exp_elem(const Var& a);
Var sum_all(const Var& a);    // 1x1
Var mean_all(const Var& a);   // 1x1

// out[r][j] = a[r][idx[r][j]]; idx entries must be distinct within a row.
Var gather_per_row(const Var& a, const std::vector<std::vector<std::size_t>>& idx);

// Divide each row by its sum.
Var row_renormalize(const Var& a);

// Reverse-mode sweep from a scalar loss. Returns one GradRecord per
// reachable trainable parameter; frozen inputs receive none.
std::vector<GradRecord> backward(const Var& loss);

}  // namespace plpp::ad
