#include "plpp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace plpp::numerics {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: a.cols != b.rows");
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < a.cols(); ++t) {
                acc += a.at(i, t) * b.at(t, j);
            }
            out.at(i, j) = acc;
        }
    }
    return out;
}

Matrix row_softmax(const Matrix& m, double temperature) {
    if (!(temperature > 0.0)) {
        throw ParameterError("row_softmax: temperature must be > 0");
    }
    Matrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto in = m.row(r);
        double mx = *std::max_element(in.begin(), in.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            double e = std::exp((in[c] - mx) / temperature);
            out.at(r, c) = e;
            sum += e;
        }
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out.at(r, c) /= sum;
        }
    }
    return out;
}

double l2_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

Matrix cosine_similarity_matrix(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw DimensionError("cosine_similarity_matrix: column counts differ");
    }
    std::vector<double> na(a.rows()), nb(b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        na[i] = l2_norm(a.row(i));
        if (na[i] == 0.0) throw DegenerateInputError("cosine_similarity_matrix: zero-norm row in a");
    }
    for (std::size_t j = 0; j < b.rows(); ++j) {
        nb[j] = l2_norm(b.row(j));
        if (nb[j] == 0.0) throw DegenerateInputError("cosine_similarity_matrix: zero-norm row in b");
    }
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double dot = 0.0;
            for (std::size_t t = 0; t < a.cols(); ++t) {
                dot += a.at(i, t) * b.at(j, t);
            }
            out.at(i, j) = dot / (na[i] * nb[j]);
        }
    }
    return out;
}

std::vector<std::size_t> topk_indices(std::span<const double> v, std::size_t k) {
    if (k < 1 || k > v.size()) {
        throw ParameterError("topk_indices: k out of range");
    }
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    idx.resize(k);
    return idx;
}

std::vector<double> gather(std::span<const double> v, std::span<const std::size_t> idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
        if (i >= v.size()) throw ParameterError("gather: index out of range");
        out.push_back(v[i]);
    }
    return out;
}

void normalize_rows(Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double n = l2_norm(m.row(r));
        if (n == 0.0) throw DegenerateInputError("normalize_rows: zero-norm row");
        for (std::size_t c = 0; c < m.cols(); ++c) m.at(r, c) /= n;
    }
}

}  // namespace plpp::numerics
