#include "plpp/matrix.hpp"

#include <cmath>
#include <utility>

namespace plpp {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw DimensionError("Matrix: values length does not match rows*cols");
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    values_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw DimensionError("Matrix: ragged initializer");
        }
        values_.insert(values_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix Matrix::row_vector(const std::vector<double>& v) {
    return Matrix(1, v.size(), v);
}

bool Matrix::all_finite() const {
    for (double x : values_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Matrix Matrix::transposed() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out.at(c, r) = at(r, c);
        }
    }
    return out;
}

}  // namespace plpp
