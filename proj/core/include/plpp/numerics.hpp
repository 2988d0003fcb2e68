#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "plpp/matrix.hpp"

namespace plpp::numerics {

// Standard product with deterministic left-to-right accumulation.
Matrix matmul(const Matrix& a, const Matrix& b);

// Row-wise softmax of m/temperature, max-subtracted for stability.
Matrix row_softmax(const Matrix& m, double temperature);

// out[i][j] = <a_i, b_j> / (|a_i| |b_j|). Throws on any zero-norm row.
Matrix cosine_similarity_matrix(const Matrix& a, const Matrix& b);

// Indices of the k largest values, descending by value, ties by ascending index.
std::vector<std::size_t> topk_indices(std::span<const double> v, std::size_t k);

std::vector<double> gather(std::span<const double> v, std::span<const std::size_t> idx);

double l2_norm(std::span<const double> v);

// In-place row normalization to unit L2 norm; throws on zero-norm rows.
void normalize_rows(Matrix& m);

}  // namespace plpp::numerics
