#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rshape {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

/// Raised when an estimator is not defined for the given data (for example
/// Tyler's estimator with n <= p, or a regularization below the existence bound).
class ExistenceError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Raised when an iterate or input becomes numerically singular.
class DegeneracyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when outlier screening leaves too few samples to re-estimate.
class ScreeningError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Symmetric positive semidefinite p x p matrix normalized to trace p.
///
/// Construction validates the invariants; use ShapeMatrix::normalized to
/// rescale an arbitrary PSD matrix first.
template <typename Scalar>
class ShapeMatrix {
  public:
    explicit ShapeMatrix(Matrix<Scalar> m) : m_(std::move(m)) { validate(); }

    /// Rescales a symmetric PSD matrix to trace p before validation.
    static ShapeMatrix normalized(const Matrix<Scalar>& m) {
        const Scalar tr = m.trace();
        if (!(tr > Scalar(0)) || !std::isfinite(static_cast<double>(tr))) {
            throw std::invalid_argument("ShapeMatrix: trace must be positive and finite");
        }
        return ShapeMatrix(Matrix<Scalar>(m * (Scalar(m.rows()) / tr)));
    }

    const Matrix<Scalar>& matrix() const noexcept { return m_; }
    Index dim() const noexcept { return m_.rows(); }

  private:
    void validate() const {
        if (m_.rows() == 0 || m_.rows() != m_.cols()) {
            throw std::invalid_argument("ShapeMatrix: matrix must be square and non-empty");
        }
        const Scalar asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
        if (asym > Scalar(1e-12)) {
            throw std::invalid_argument("ShapeMatrix: matrix is not symmetric");
        }
        const Scalar p = Scalar(m_.rows());
        if (std::abs(m_.trace() - p) > Scalar(1e-8) * p) {
            throw std::invalid_argument("ShapeMatrix: trace must equal the dimension");
        }
        Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(m_, Eigen::EigenvaluesOnly);
        const Scalar scale = es.eigenvalues().cwiseAbs().maxCoeff();
        if (es.eigenvalues().minCoeff() < Scalar(-1e-10) * scale) {
            throw std::invalid_argument("ShapeMatrix: matrix is not positive semidefinite");
        }
    }

    Matrix<Scalar> m_;
};

using Shape = ShapeMatrix<double>;

/// How a dataset was produced; enough to regenerate it.
struct GenerationRecord {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::string model;
};

/// n samples in R^p stored column-wise (p x n), optionally labeled
/// (true = outlier). No column is exactly zero.
struct DataSet {
    MatrixXd samples;
    std::optional<std::vector<bool>> labels;
    GenerationRecord meta;

    Index dim() const noexcept { return samples.rows(); }
    Index size() const noexcept { return samples.cols(); }
};

/// Throws std::invalid_argument if any column of `samples` is exactly zero.
inline void require_nonzero_samples(const MatrixXd& samples, const char* who) {
    for (Index i = 0; i < samples.cols(); ++i) {
        if ((samples.col(i).array() == 0.0).all()) {
            throw std::invalid_argument(std::string(who) + ": sample " + std::to_string(i) +
                                        " is the zero vector");
        }
    }
}

}  // namespace rshape
