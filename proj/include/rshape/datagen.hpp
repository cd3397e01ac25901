#pragma once

#include <string>
#include <string_view>

#include "rshape/rng.hpp"
#include "rshape/types.hpp"

namespace rshape {

enum class XiMode { SphereUniform, StandardGaussian };
enum class ULaw { Constant, Laplace, Cauchy };
enum class OutlierSpec { Uniform15, Spiked };

std::string to_string(XiMode mode);
std::string to_string(ULaw law);
std::string to_string(OutlierSpec spec);
XiMode parse_xi_mode(std::string_view name);
ULaw parse_u_law(std::string_view name);
OutlierSpec parse_outlier_spec(std::string_view name);

/// x = location + u * S^{1/2} * xi, with u and xi drawn independently per sample.
struct EllipticalModel {
    Shape shape;
    XiMode xi_mode = XiMode::StandardGaussian;
    ULaw u_law = ULaw::Constant;
    VectorXd location;  // empty means zero

    explicit EllipticalModel(Shape s, XiMode xi = XiMode::StandardGaussian,
                             ULaw u = ULaw::Constant, VectorXd mu = {})
        : shape(std::move(s)), xi_mode(xi), u_law(u), location(std::move(mu)) {}

    std::string describe() const;
};

/// (1 - epsilon) n inliers from `inlier`, round(epsilon n) outliers from an
/// elliptical model whose shape is drawn by outlier_shape.
struct ContaminationSpec {
    double epsilon = 0.0;
    EllipticalModel inlier;
    OutlierSpec outlier = OutlierSpec::Uniform15;
};

/// Toeplitz shape with entries rho^|i-j|.
Shape ar_shape(Index p, double rho);

/// n draws from `model`. The xi and u sequences come from separate child
/// streams of `rng`, so two models differing only in u_law share their xi draws.
DataSet sample_elliptical(const EllipticalModel& model, Index n, const Rng& rng);

/// x_i = x_{2i} - x_{2i-1} (1-based) over the columns of `samples`.
DataSet pair_differences(const MatrixXd& samples);

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// of diag(R) absorbed into Q.
MatrixXd haar_orthogonal(Index p, Rng& rng);

/// U (p D / tr D) U^T with U Haar-distributed.
Shape outlier_shape(Index p, OutlierSpec spec, Rng& rng);

/// round(epsilon * n) outliers; samples shuffled, labels kept aligned.
Index outlier_count(double epsilon, Index n);
DataSet contaminate(const ContaminationSpec& spec, Index n, const Rng& rng);

}  // namespace rshape
