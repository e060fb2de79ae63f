#ifndef OCEANPROV_MATRIX_HPP
#define OCEANPROV_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace oceanprov {

// Dense row-major matrix of doubles. Rows are observations throughout the
// library; columns are features or embedding components.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw std::invalid_argument("Matrix: data size does not match shape");
        }
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m;
        m.rows_ = rows.size();
        m.cols_ = rows.size() ? rows.begin()->size() : 0;
        m.data_.reserve(m.rows_ * m.cols_);
        for (const auto& r : rows) {
            if (r.size() != m.cols_) {
                throw std::invalid_argument("Matrix: ragged initializer");
            }
            m.data_.insert(m.data_.end(), r.begin(), r.end());
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

}

#endif
