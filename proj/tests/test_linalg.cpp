#include <doctest.h>

#include "support.hpp"

using namespace pushpull;
using namespace testing_support;

TEST_CASE("matrix product matches Eigen") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix a = random_matrix(5, 7, rng);
        const Matrix b = random_matrix(7, 3, rng);
        const Eigen::MatrixXd ref = to_eigen(a) * to_eigen(b);
        CHECK(max_abs_diff(a * b, from_eigen(ref)) < 1e-12);
    }
}

TEST_CASE("vector helpers") {
    const Matrix m{{1, 2, 3}, {4, 5, 6}};
    CHECK(column_sums(m) == Vector{5, 7, 9});
    CHECK(row_sums(m) == Vector{6, 15});
    CHECK(left_multiply(Vector{1, -1}, m) == Vector{-3, -3, -3});
    CHECK(right_multiply(m, Vector{1, 0, -1}) == Vector{-2, -2});
    CHECK(transpose(m) == Matrix{{1, 4}, {2, 5}, {3, 6}});
    CHECK(norm1(Vector{-1, 2, -3}) == 6.0);
    CHECK(norm2(Vector{3, 4}) == 5.0);
    CHECK(Matrix::broadcast_rows(2, Vector{1, 2}) == Matrix{{1, 2}, {1, 2}});
    CHECK(Matrix::outer(Vector{1, 2}, Vector{3, 4}) == Matrix{{3, 4}, {6, 8}});
    CHECK(Matrix::identity(2).diagonal() == Vector{1, 1});
}

TEST_CASE("shape mismatches throw") {
    CHECK_THROWS_AS(Matrix(2, 3) * Matrix(2, 3), std::invalid_argument);
    CHECK_THROWS_AS(Matrix(2, 3) + Matrix(3, 2), std::invalid_argument);
    CHECK_THROWS_AS(left_multiply(Vector{1}, Matrix(2, 2)), std::invalid_argument);
    CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), std::invalid_argument);
}

TEST_CASE("spectral norm agrees with SVD oracle") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t r = 1 + rep % 9, c = 1 + (rep * 7) % 11;
        const Matrix m = random_matrix(r, c, rng);
        const double ref = svd_norm(m);
        CHECK(spectral_norm(m) == doctest::Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("spectral norm: projection, zero, warm start") {
    // I − (1/n)𝟙𝟙ᵀ is an orthogonal projection of norm 1.
    const std::size_t n = 6;
    Matrix p = Matrix::identity(n) - Matrix(n, n, 1.0 / n);
    CHECK(spectral_norm(p) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spectral_norm(Matrix(3, 3)) == 0.0);

    // An all-ones warm start lies in the null space; the cold restart recovers.
    Vector warm(n, 1.0);
    CHECK(spectral_norm(p, &warm) == doctest::Approx(1.0).epsilon(1e-12));
}
