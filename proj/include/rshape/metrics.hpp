#pragma once

#include <cmath>
#include <numeric>
#include <span>

#include "rshape/types.hpp"

namespace rshape {

/// Largest absolute eigenvalue of a symmetric matrix.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    if (a.rows() != a.cols()) throw std::invalid_argument("spectral_norm: matrix must be square");
    if (a.size() == 0) return Scalar(0);
    const Scalar scale = std::max(Scalar(1), a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-8) * scale) {
        throw std::invalid_argument("spectral_norm: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// ||est - truth|| / ||truth|| in spectral norm.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar relative_spectral_error(const Eigen::MatrixBase<DerivedA>& est,
                                                  const Eigen::MatrixBase<DerivedB>& truth) {
    if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
        throw std::invalid_argument("relative_spectral_error: dimension mismatch");
    }
    return spectral_norm(est - truth) / spectral_norm(truth);
}

template <typename Derived>
double relative_spectral_error(const Eigen::MatrixBase<Derived>& est, const Shape& truth) {
    return relative_spectral_error(est, truth.matrix());
}

/// Natural log of the mean relative error over realizations.
inline double lre(std::span<const double> relative_errors) {
    if (relative_errors.empty()) throw std::invalid_argument("lre: no errors given");
    const double mean = std::accumulate(relative_errors.begin(), relative_errors.end(), 0.0) /
                        static_cast<double>(relative_errors.size());
    if (!(mean > 0.0)) throw std::domain_error("lre: mean error must be positive");
    return std::log(mean);
}

/// Row-wise l_q statistics of a matrix against the class
/// { a_ii <= M, sum_j |a_ij|^q <= s_p for every row }.
struct SparsityStats {
    double q = 1.0;
    double max_row_lq = 0.0;
    double max_diag = 0.0;

    bool member_of(double s_p, double max_diag_bound) const {
        return max_diag <= max_diag_bound && max_row_lq <= s_p;
    }
};

/// Uses 0^0 = 0, so q = 0 counts nonzeros per row.
template <typename Derived>
SparsityStats sparsity_stats(const Eigen::MatrixBase<Derived>& a, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("sparsity_stats: q must lie in [0, 1]");
    SparsityStats s;
    s.q = q;
    s.max_diag = static_cast<double>(a.diagonal().maxCoeff());
    for (Index i = 0; i < a.rows(); ++i) {
        double row = 0.0;
        for (Index j = 0; j < a.cols(); ++j) {
            const double v = std::abs(static_cast<double>(a(i, j)));
            if (v != 0.0) row += q == 0.0 ? 1.0 : std::pow(v, q);
        }
        s.max_row_lq = std::max(s.max_row_lq, row);
    }
    return s;
}

}  // namespace rshape
