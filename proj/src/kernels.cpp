#include "pushpull/kernels.hpp"

#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pushpull::kernels {

namespace {

void check_mix_shapes(const Matrix& w, const Matrix& x, Matrix& out) {
    if (w.rows() != w.cols() || w.cols() != x.rows()) {
        throw std::invalid_argument("mix: W must be n×n with n = rows(X)");
    }
    if (out.rows() != x.rows() || out.cols() != x.cols()) out = Matrix(x.rows(), x.cols());
}

// One output row of W·X. Shared by both policies so the floating-point
// evaluation order is identical.
inline void mix_row(const Matrix& w, const Matrix& x, std::size_t i, std::span<double> dst) {
    for (double& v : dst) v = 0.0;
    for (std::size_t k = 0; k < w.cols(); ++k) {
        const double wik = w(i, k);
        if (wik == 0.0) continue;
        auto src = x.row(k);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += wik * src[j];
    }
}

inline void mix_axpy_row(const Matrix& w, const Matrix& x, double alpha, const Matrix& y,
                         std::size_t i, std::span<double> dst) {
    mix_row(w, x, i, dst);
    auto yr = y.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] -= alpha * yr[j];
}

inline void track_row(const Matrix& w, const Matrix& y, const Matrix& g_old, const Matrix& g_new,
                      std::size_t i, std::span<double> dst) {
    mix_row(w, y, i, dst);
    auto go = g_old.row(i);
    auto gn = g_new.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = (dst[j] - go[j]) + gn[j];
}

} // namespace

void mix_serial(const Matrix& w, const Matrix& x, Matrix& out) {
    check_mix_shapes(w, x, out);
    for (std::size_t i = 0; i < x.rows(); ++i) mix_row(w, x, i, out.row(i));
}

void mix_parallel(const Matrix& w, const Matrix& x, Matrix& out) {
    check_mix_shapes(w, x, out);
    const long long n = static_cast<long long>(x.rows());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        mix_row(w, x, row, out.row(row));
    }
}

void mix(const Matrix& w, const Matrix& x, Matrix& out, Exec exec) {
    exec == Exec::Parallel ? mix_parallel(w, x, out) : mix_serial(w, x, out);
}

void mix_axpy_serial(const Matrix& w, const Matrix& x, double alpha, const Matrix& y, Matrix& out) {
    check_mix_shapes(w, x, out);
    for (std::size_t i = 0; i < x.rows(); ++i) mix_axpy_row(w, x, alpha, y, i, out.row(i));
}

void mix_axpy_parallel(const Matrix& w, const Matrix& x, double alpha, const Matrix& y, Matrix& out) {
    check_mix_shapes(w, x, out);
    const long long n = static_cast<long long>(x.rows());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        mix_axpy_row(w, x, alpha, y, row, out.row(row));
    }
}

void mix_axpy(const Matrix& w, const Matrix& x, double alpha, const Matrix& y, Matrix& out, Exec exec) {
    exec == Exec::Parallel ? mix_axpy_parallel(w, x, alpha, y, out)
                           : mix_axpy_serial(w, x, alpha, y, out);
}

void track_serial(const Matrix& w, const Matrix& y, const Matrix& g_old, const Matrix& g_new, Matrix& out) {
    check_mix_shapes(w, y, out);
    for (std::size_t i = 0; i < y.rows(); ++i) track_row(w, y, g_old, g_new, i, out.row(i));
}

void track_parallel(const Matrix& w, const Matrix& y, const Matrix& g_old, const Matrix& g_new, Matrix& out) {
    check_mix_shapes(w, y, out);
    const long long n = static_cast<long long>(y.rows());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        track_row(w, y, g_old, g_new, row, out.row(row));
    }
}

void track(const Matrix& w, const Matrix& y, const Matrix& g_old, const Matrix& g_new, Matrix& out, Exec exec) {
    exec == Exec::Parallel ? track_parallel(w, y, g_old, g_new, out)
                           : track_serial(w, y, g_old, g_new, out);
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace pushpull::kernels
