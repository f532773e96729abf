#include "pushpull/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace pushpull {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw std::invalid_argument("Matrix: ragged initializer list");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::outer(std::span<const double> u, std::span<const double> v) {
    Matrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
    return m;
}

Matrix Matrix::broadcast_rows(std::size_t rows, std::span<const double> row) {
    Matrix m(rows, row.size());
    for (std::size_t i = 0; i < rows; ++i) std::copy(row.begin(), row.end(), m.row(i).begin());
    return m;
}

Vector Matrix::diagonal() const {
    const std::size_t k = std::min(rows_, cols_);
    Vector d(k);
    for (std::size_t i = 0; i < k; ++i) d[i] = (*this)(i, i);
    return d;
}

static void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
    }
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other, "Matrix::operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other, "Matrix::operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("Matrix product: inner dimension mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto dst = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto src = b.row(k);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Vector column_sums(const Matrix& m) {
    Vector s(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) s[j] += r[j];
    }
    return s;
}

Vector row_sums(const Matrix& m) {
    Vector s(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (double x : m.row(i)) s[i] += x;
    }
    return s;
}

Vector left_multiply(std::span<const double> v, const Matrix& m) {
    if (v.size() != m.rows()) throw std::invalid_argument("left_multiply: size mismatch");
    Vector out(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) out[j] += v[i] * r[j];
    }
    return out;
}

Vector right_multiply(const Matrix& m, std::span<const double> v) {
    if (v.size() != m.cols()) throw std::invalid_argument("right_multiply: size mismatch");
    Vector out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), v);
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double norm1(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

double frobenius_norm(const Matrix& m) { return norm2(m.data()); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double worst = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k)
        worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
    return worst;
}

namespace {

Vector default_start(std::size_t n) {
    // Fixed pseudo-random start, essentially never orthogonal to the top
    // singular vector. The all-ones vector would be: it spans the null
    // space of I − 𝟙πᵀ.
    std::mt19937_64 gen(0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal;
    Vector v(n);
    for (double& x : v) x = normal(gen);
    return v;
}

bool normalize(Vector& v) {
    const double nv = norm2(v);
    if (!(nv > 0.0) || !std::isfinite(nv)) return false;
    for (double& x : v) x /= nv;
    return true;
}

} // namespace

double spectral_norm(const Matrix& m, Vector* warm, const SpectralNormOptions& opts) {
    const std::size_t n = m.cols();
    if (n == 0 || m.rows() == 0) return 0.0;
    const double fro = frobenius_norm(m);
    if (fro == 0.0) return 0.0;

    Vector v;
    if (warm != nullptr && warm->size() == n) v = *warm;
    if (!normalize(v)) {
        v = default_start(n);
        normalize(v);
    }

    Vector u(m.rows());
    Vector w(n);
    double sigma = 0.0;
    bool reseeded = false;
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
        u = right_multiply(m, v);
        const double next = norm2(u);
        if (next <= 1e-3 * fro / std::sqrt(static_cast<double>(n)) && !reseeded && it == 0) {
            // Warm vector landed (nearly) in the null space; restart cold.
            reseeded = true;
            v = default_start(n);
            normalize(v);
            continue;
        }
        w.assign(n, 0.0);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            auto r = m.row(i);
            for (std::size_t j = 0; j < n; ++j) w[j] += r[j] * u[i];
        }
        const bool converged = it >= 2 && std::abs(next - sigma) <= opts.rel_tol * next;
        sigma = next;
        if (!normalize(w)) break;
        v.swap(w);
        if (converged) break;
    }
    if (warm != nullptr) *warm = v;
    return sigma;
}

} // namespace pushpull
