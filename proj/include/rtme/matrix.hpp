#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace rtme {

/// Dense real square matrix, row-major storage. Sized for the small state
/// spaces this library works with (dim up to a few dozen); all algorithms
/// here are plain O(dim^3) without blocking.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(int dim);  // zero matrix
    SquareMatrix(int dim, std::vector<double> entries);

    static SquareMatrix identity(int dim);
    static SquareMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    int dim() const { return dim_; }
    bool empty() const { return dim_ == 0; }

    double& at(int i, int j) { return data_[static_cast<std::size_t>(i) * dim_ + j]; }
    double at(int i, int j) const { return data_[static_cast<std::size_t>(i) * dim_ + j]; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    SquareMatrix& operator+=(const SquareMatrix& o);
    SquareMatrix& operator-=(const SquareMatrix& o);
    SquareMatrix& operator*=(double s);
    friend SquareMatrix operator+(SquareMatrix a, const SquareMatrix& b) { return a += b; }
    friend SquareMatrix operator-(SquareMatrix a, const SquareMatrix& b) { return a -= b; }
    friend SquareMatrix operator*(SquareMatrix a, double s) { return a *= s; }
    friend SquareMatrix operator*(double s, SquareMatrix a) { return a *= s; }
    SquareMatrix operator*(const SquareMatrix& o) const;

    SquareMatrix transpose() const;

    double max_abs() const;   // max |a_ij|
    double norm_inf() const;  // max row sum of |a_ij|
    double norm_one() const;  // max column sum of |a_ij|
    bool all_finite() const;

    /// Solves this * X = rhs by LU with partial pivoting.
    /// Throws Error("Singular") when no pivot survives.
    SquareMatrix solve(const SquareMatrix& rhs) const;
    SquareMatrix inverse() const;
    double determinant() const;

    std::string to_string(int precision = 6) const;

    bool operator==(const SquareMatrix&) const = default;

private:
    void require_same_dim(const SquareMatrix& o) const;

    int dim_ = 0;
    std::vector<double> data_;
};

/// max_ij |a_ij - b_ij|
double max_abs_diff(const SquareMatrix& a, const SquareMatrix& b);

}  // namespace rtme
