#pragma once

#include <cstddef>
#include <span>

#include "pushpull/linalg.hpp"

namespace pushpull::kernels {

/// Execution policy for the data-parallel inner loops. Both policies run the
/// same per-row arithmetic in the same order, so results are bit-identical;
/// Serial is the reference the OpenMP path is tested against.
enum class Exec { Serial, Parallel };

/// out = W·X  (n×n times n×d). `out` must not alias X.
void mix_serial(const Matrix& w, const Matrix& x, Matrix& out);
void mix_parallel(const Matrix& w, const Matrix& x, Matrix& out);
void mix(const Matrix& w, const Matrix& x, Matrix& out, Exec exec);

/// out = W·X − alpha·Y.
void mix_axpy_serial(const Matrix& w, const Matrix& x, double alpha, const Matrix& y, Matrix& out);
void mix_axpy_parallel(const Matrix& w, const Matrix& x, double alpha, const Matrix& y, Matrix& out);
void mix_axpy(const Matrix& w, const Matrix& x, double alpha, const Matrix& y, Matrix& out, Exec exec);

/// Tracker update out = (W·Y − G_old) + G_new, evaluated in that order so
/// that W = [1] and Y == G_old give out == G_new exactly.
void track_serial(const Matrix& w, const Matrix& y, const Matrix& g_old, const Matrix& g_new, Matrix& out);
void track_parallel(const Matrix& w, const Matrix& y, const Matrix& g_old, const Matrix& g_new, Matrix& out);
void track(const Matrix& w, const Matrix& y, const Matrix& g_old, const Matrix& g_new, Matrix& out, Exec exec);

/// Calls body(i) for i in [0, count). The Parallel policy distributes
/// indices over OpenMP threads; body must only touch per-index state.
template <class Body>
void for_each_index(std::size_t count, Exec exec, Body&& body) {
    if (exec == Exec::Parallel && count > 1) {
        const long long total = static_cast<long long>(count);
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < total; ++i) body(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < count; ++i) body(i);
    }
}

/// Number of OpenMP threads available (1 without OpenMP).
int max_threads();

} // namespace pushpull::kernels
