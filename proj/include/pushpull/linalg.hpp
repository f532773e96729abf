#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace pushpull {

using Vector = std::vector<double>;

/// Dense row-major matrix. Sizes in this project are small (n <= 64 nodes,
/// d ~ 10 features), so everything lives in one contiguous buffer.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    /// Outer product u vᵀ.
    static Matrix outer(std::span<const double> u, std::span<const double> v);
    /// Every row equal to `row`.
    static Matrix broadcast_rows(std::size_t rows, std::span<const double> row);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    Vector diagonal() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
/// Dense product, serial reference kernel.
Matrix operator*(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Column sums, i.e. 𝟙ᵀM as a vector of length cols.
Vector column_sums(const Matrix& m);
Vector row_sums(const Matrix& m);
/// vᵀM.
Vector left_multiply(std::span<const double> v, const Matrix& m);
/// M v.
Vector right_multiply(const Matrix& m, std::span<const double> v);

double norm2(std::span<const double> v);
double norm1(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double frobenius_norm(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

struct SpectralNormOptions {
    double rel_tol = 1e-12;
    std::size_t max_iter = 20000;
};

/// ‖M‖₂ by power iteration on MᵀM. `warm` (length cols) seeds the iteration
/// and receives the final right singular vector estimate, which makes
/// sequences of closely related matrices cheap.
double spectral_norm(const Matrix& m, Vector* warm = nullptr,
                     const SpectralNormOptions& opts = {});

} // namespace pushpull
