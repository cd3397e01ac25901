#include "rshape/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rshape {

namespace {

// child stream tags
constexpr std::uint32_t kXiTag = 1;
constexpr std::uint32_t kUTag = 2;
constexpr std::uint32_t kInlierTag = 11;
constexpr std::uint32_t kOutlierTag = 12;
constexpr std::uint32_t kOutlierShapeTag = 13;
constexpr std::uint32_t kShuffleTag = 14;

double draw_u(ULaw law, Rng& rng) {
    switch (law) {
        case ULaw::Constant: return 1.0;
        case ULaw::Laplace: return rng.laplace();
        case ULaw::Cauchy: return rng.cauchy();
    }
    return 1.0;
}

void draw_xi(XiMode mode, Rng& rng, Eigen::Ref<VectorXd> xi) {
    for (;;) {
        for (Index j = 0; j < xi.size(); ++j) xi[j] = rng.normal();
        if (mode == XiMode::StandardGaussian) return;
        const double norm = xi.norm();
        if (norm > 0.0) {
            xi /= norm;
            return;
        }
    }
}

}  // namespace

std::string to_string(XiMode mode) {
    return mode == XiMode::SphereUniform ? "sphere" : "gaussian";
}

std::string to_string(ULaw law) {
    switch (law) {
        case ULaw::Constant: return "constant";
        case ULaw::Laplace: return "laplace";
        case ULaw::Cauchy: return "cauchy";
    }
    return "constant";
}

std::string to_string(OutlierSpec spec) {
    return spec == OutlierSpec::Uniform15 ? "uniform15" : "spiked";
}

XiMode parse_xi_mode(std::string_view name) {
    if (name == "sphere") return XiMode::SphereUniform;
    if (name == "gaussian") return XiMode::StandardGaussian;
    throw std::invalid_argument("unknown xi mode: " + std::string(name));
}

ULaw parse_u_law(std::string_view name) {
    if (name == "constant" || name == "gaussian" || name == "1") return ULaw::Constant;
    if (name == "laplace") return ULaw::Laplace;
    if (name == "cauchy") return ULaw::Cauchy;
    throw std::invalid_argument("unknown u law: " + std::string(name));
}

OutlierSpec parse_outlier_spec(std::string_view name) {
    if (name == "uniform15" || name == "uniform") return OutlierSpec::Uniform15;
    if (name == "spiked") return OutlierSpec::Spiked;
    throw std::invalid_argument("unknown outlier model: " + std::string(name));
}

std::string EllipticalModel::describe() const {
    std::ostringstream os;
    os << "elliptical(p=" << shape.dim() << ",xi=" << to_string(xi_mode)
       << ",u=" << to_string(u_law) << (location.size() ? ",mu=given" : "") << ")";
    return os.str();
}

Shape ar_shape(Index p, double rho) {
    if (p < 1) throw std::invalid_argument("ar_shape: p must be positive");
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("ar_shape: |rho| must be < 1");
    MatrixXd s(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j)
            s(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    return Shape(std::move(s));
}

DataSet sample_elliptical(const EllipticalModel& model, Index n, const Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_elliptical: n must be positive");
    const Index p = model.shape.dim();
    if (model.location.size() != 0 && model.location.size() != p) {
        throw std::invalid_argument("sample_elliptical: location has wrong dimension");
    }
    const Eigen::LLT<MatrixXd> llt(model.shape.matrix());
    if (llt.info() != Eigen::Success) {
        throw DegeneracyError("sample_elliptical: shape matrix is not positive definite");
    }
    const MatrixXd root = llt.matrixL();

    Rng xi_rng = rng.child(kXiTag);
    Rng u_rng = rng.child(kUTag);
    DataSet out;
    out.samples.resize(p, n);
    VectorXd xi(p);
    for (Index i = 0; i < n; ++i) {
        for (;;) {
            draw_xi(model.xi_mode, xi_rng, xi);
            const double u = draw_u(model.u_law, u_rng);
            out.samples.col(i) = u * (root * xi);
            if (model.location.size()) out.samples.col(i) += model.location;
            if (!(out.samples.col(i).array() == 0.0).all()) break;
        }
    }
    out.meta = {rng.seed(), rng.realization(), model.describe()};
    return out;
}

DataSet pair_differences(const MatrixXd& samples) {
    if (samples.cols() % 2 != 0) {
        throw std::invalid_argument("pair_differences: need an even number of samples");
    }
    const Index n = samples.cols() / 2;
    DataSet out;
    out.samples.resize(samples.rows(), n);
    for (Index i = 0; i < n; ++i) out.samples.col(i) = samples.col(2 * i + 1) - samples.col(2 * i);
    require_nonzero_samples(out.samples, "pair_differences");
    out.meta.model = "pair-differences";
    return out;
}

MatrixXd haar_orthogonal(Index p, Rng& rng) {
    if (p < 1) throw std::invalid_argument("haar_orthogonal: p must be positive");
    MatrixXd g(p, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < p; ++i) g(i, j) = rng.normal();
    const Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ();
    const MatrixXd& r = qr.matrixQR();
    for (Index j = 0; j < p; ++j) {
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    return q;
}

Shape outlier_shape(Index p, OutlierSpec spec, Rng& rng) {
    VectorXd d(p);
    if (spec == OutlierSpec::Spiked) {
        if (p < 2) throw std::invalid_argument("outlier_shape: spiked spec needs p >= 2");
        d.setOnes();
        d[0] = static_cast<double>(p);
        d[1] = static_cast<double>(p) / 2.0;
    } else {
        for (Index i = 0; i < p; ++i) d[i] = rng.uniform(1.0, 5.0);
    }
    const MatrixXd u = haar_orthogonal(p, rng);
    d *= static_cast<double>(p) / d.sum();
    MatrixXd s = u * d.asDiagonal() * u.transpose();
    s = 0.5 * (s + s.transpose()).eval();
    return Shape::normalized(s);
}

Index outlier_count(double epsilon, Index n) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("contaminate: epsilon must lie in [0, 1)");
    }
    return static_cast<Index>(std::llround(epsilon * static_cast<double>(n)));
}

DataSet contaminate(const ContaminationSpec& spec, Index n, const Rng& rng) {
    const Index n_out = outlier_count(spec.epsilon, n);
    const Index n_in = n - n_out;
    const Index p = spec.inlier.shape.dim();

    MatrixXd pooled(p, n);
    std::vector<bool> pooled_labels(static_cast<std::size_t>(n), false);
    if (n_in > 0) {
        pooled.leftCols(n_in) = sample_elliptical(spec.inlier, n_in, rng.child(kInlierTag)).samples;
    }
    if (n_out > 0) {
        Rng shape_rng = rng.child(kOutlierShapeTag);
        EllipticalModel out_model(outlier_shape(p, spec.outlier, shape_rng), spec.inlier.xi_mode,
                                  spec.inlier.u_law, spec.inlier.location);
        pooled.rightCols(n_out) = sample_elliptical(out_model, n_out, rng.child(kOutlierTag)).samples;
        std::fill(pooled_labels.begin() + n_in, pooled_labels.end(), true);
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng shuffle_rng = rng.child(kShuffleTag);
    for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(shuffle_rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(order[i], order[j]);
    }

    DataSet out;
    out.samples.resize(p, n);
    std::vector<bool> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        out.samples.col(i) = pooled.col(order[i]);
        labels[i] = pooled_labels[order[i]];
    }
    out.labels = std::move(labels);
    std::ostringstream os;
    os << "contaminated(eps=" << spec.epsilon << ",inlier=" << spec.inlier.describe()
       << ",outlier=" << to_string(spec.outlier) << ")";
    out.meta = {rng.seed(), rng.realization(), os.str()};
    return out;
}

}  // namespace rshape
