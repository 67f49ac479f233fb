#include "rtme/matrix.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "rtme/error.hpp"

namespace rtme {

namespace {

// Compact LU factorization with partial pivoting; L has unit diagonal and is
// stored below the diagonal of `lu`, U on and above it.
struct LuFactors {
    int dim = 0;
    std::vector<double> lu;
    std::vector<int> perm;
    int sign = 1;
    bool singular = false;
};

LuFactors lu_factor(const SquareMatrix& a) {
    const int n = a.dim();
    LuFactors f;
    f.dim = n;
    f.lu = a.data();
    f.perm.resize(n);
    for (int i = 0; i < n; ++i) f.perm[i] = i;

    auto e = [&](int i, int j) -> double& { return f.lu[static_cast<std::size_t>(i) * n + j]; };

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::fabs(e(col, col));
        for (int r = col + 1; r < n; ++r) {
            double v = std::fabs(e(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best == 0.0) {
            f.singular = true;
            return f;
        }
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(e(pivot, j), e(col, j));
            std::swap(f.perm[pivot], f.perm[col]);
            f.sign = -f.sign;
        }
        const double d = e(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double m = e(r, col) / d;
            e(r, col) = m;
            if (m != 0.0) {
                for (int j = col + 1; j < n; ++j) e(r, j) -= m * e(col, j);
            }
        }
    }
    return f;
}

// Solves LU x = P rhs for one column.
void lu_solve_column(const LuFactors& f, const double* rhs, int stride, double* out, int out_stride) {
    const int n = f.dim;
    std::vector<double> y(n);
    auto e = [&](int i, int j) { return f.lu[static_cast<std::size_t>(i) * n + j]; };
    for (int i = 0; i < n; ++i) {
        double s = rhs[static_cast<std::size_t>(f.perm[i]) * stride];
        for (int j = 0; j < i; ++j) s -= e(i, j) * y[j];
        y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int j = i + 1; j < n; ++j) s -= e(i, j) * out[static_cast<std::size_t>(j) * out_stride];
        out[static_cast<std::size_t>(i) * out_stride] = s / e(i, i);
    }
}

}  // namespace

SquareMatrix::SquareMatrix(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim, 0.0) {
    if (dim < 2) throw argument_error("BadDimension", "matrix dimension must be at least 2");
}

SquareMatrix::SquareMatrix(int dim, std::vector<double> entries)
    : dim_(dim), data_(std::move(entries)) {
    if (dim < 2) throw argument_error("BadDimension", "matrix dimension must be at least 2");
    if (data_.size() != static_cast<std::size_t>(dim) * dim)
        throw argument_error("BadDimension", "entry count does not match dimension");
    if (!all_finite()) throw argument_error("NonFinite", "matrix entries must be finite");
}

SquareMatrix SquareMatrix::identity(int dim) {
    SquareMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

SquareMatrix SquareMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int n = static_cast<int>(rows.size());
    std::vector<double> entries;
    entries.reserve(static_cast<std::size_t>(n) * n);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != n)
            throw argument_error("BadDimension", "rows must form a square matrix");
        entries.insert(entries.end(), row.begin(), row.end());
    }
    return SquareMatrix(n, std::move(entries));
}

void SquareMatrix::require_same_dim(const SquareMatrix& o) const {
    if (dim_ != o.dim_) throw argument_error("ShapeMismatch", "matrix dimensions differ");
}

SquareMatrix& SquareMatrix::operator+=(const SquareMatrix& o) {
    require_same_dim(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

SquareMatrix& SquareMatrix::operator-=(const SquareMatrix& o) {
    require_same_dim(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

SquareMatrix& SquareMatrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

SquareMatrix SquareMatrix::operator*(const SquareMatrix& o) const {
    require_same_dim(o);
    const int n = dim_;
    SquareMatrix r(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const double aik = at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < n; ++j) r.at(i, j) += aik * o.at(k, j);
        }
    }
    return r;
}

SquareMatrix SquareMatrix::transpose() const {
    SquareMatrix r(dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) r.at(j, i) = at(i, j);
    return r;
}

double SquareMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

double SquareMatrix::norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += std::fabs(at(i, j));
        m = std::max(m, s);
    }
    return m;
}

double SquareMatrix::norm_one() const {
    double m = 0.0;
    for (int j = 0; j < dim_; ++j) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += std::fabs(at(i, j));
        m = std::max(m, s);
    }
    return m;
}

bool SquareMatrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

SquareMatrix SquareMatrix::solve(const SquareMatrix& rhs) const {
    require_same_dim(rhs);
    LuFactors f = lu_factor(*this);
    if (f.singular) throw numeric_error("Singular", "matrix is singular to working precision");
    SquareMatrix x(dim_);
    for (int col = 0; col < dim_; ++col) {
        lu_solve_column(f, rhs.data().data() + col, dim_, x.data().data() + col, dim_);
    }
    return x;
}

SquareMatrix SquareMatrix::inverse() const { return solve(identity(dim_)); }

double SquareMatrix::determinant() const {
    LuFactors f = lu_factor(*this);
    if (f.singular) return 0.0;
    double d = static_cast<double>(f.sign);
    for (int i = 0; i < dim_; ++i) d *= f.lu[static_cast<std::size_t>(i) * dim_ + i];
    return d;
}

std::string SquareMatrix::to_string(int precision) const {
    std::ostringstream os;
    os.precision(precision);
    for (int i = 0; i < dim_; ++i) {
        os << (i == 0 ? "[" : " ");
        for (int j = 0; j < dim_; ++j) os << (j == 0 ? "[" : ", ") << at(i, j);
        os << "]" << (i + 1 == dim_ ? "]" : "\n");
    }
    return os.str();
}

double max_abs_diff(const SquareMatrix& a, const SquareMatrix& b) {
    SquareMatrix d = a;
    d -= b;
    return d.max_abs();
}

}  // namespace rtme
