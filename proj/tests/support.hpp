#pragma once

#include <Eigen/Dense>

#include "pushpull/harness.hpp"

namespace testing_support {

using pushpull::Matrix;

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

inline Matrix from_eigen(const Eigen::MatrixXd& e) {
    Matrix m(e.rows(), e.cols());
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
    return m;
}

/// Largest singular value via Eigen's SVD.
inline double svd_norm(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
    return svd.singularValues()(0);
}

/// Eigenvector of `m` for the eigenvalue closest to 1, ℓ₁-normalized.
inline Eigen::VectorXd unit_eigenvector(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < m.rows(); ++k) {
        if (std::abs(es.eigenvalues()(k) - 1.0) < std::abs(es.eigenvalues()(best) - 1.0)) best = k;
    }
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    return v / v.sum();
}

inline Matrix random_matrix(std::size_t r, std::size_t c, pushpull::Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Matrix m(r, c);
    for (double& x : m.data()) x = nd(rng);
    return m;
}

inline constexpr pushpull::TopologyKind kAllTopologies[] = {
    pushpull::TopologyKind::Exponential, pushpull::TopologyKind::Ring,
    pushpull::TopologyKind::Grid,        pushpull::TopologyKind::Random,
    pushpull::TopologyKind::Geometric,   pushpull::TopologyKind::NearestNeighbor};

}  // namespace testing_support
