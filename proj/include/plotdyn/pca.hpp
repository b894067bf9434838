#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "error.hpp"

namespace plotdyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column standardisation fitted on a data matrix.
struct Standardizer {
    std::vector<Eigen::Index> kept;  // columns with non-zero variance
    Vector mean;                     // of kept columns
    Vector scale;                    // population std of kept columns

    static constexpr double kZeroVariance = 1e-12;

    static Standardizer fit(const Matrix& data) {
        Standardizer s;
        const double n = static_cast<double>(data.rows());
        std::vector<double> means, scales;
        for (Eigen::Index c = 0; c < data.cols(); ++c) {
            const double m = data.col(c).mean();
            const double var = (data.col(c).array() - m).square().sum() / n;
            if (var > kZeroVariance) {
                s.kept.push_back(c);
                means.push_back(m);
                scales.push_back(std::sqrt(var));
            }
        }
        s.mean = Eigen::Map<Vector>(means.data(), static_cast<Eigen::Index>(means.size()));
        s.scale = Eigen::Map<Vector>(scales.data(), static_cast<Eigen::Index>(scales.size()));
        return s;
    }

    Matrix transform(const Matrix& data) const {
        Matrix out(data.rows(), static_cast<Eigen::Index>(kept.size()));
        for (std::size_t i = 0; i < kept.size(); ++i) {
            const auto c = static_cast<Eigen::Index>(i);
            out.col(c) = (data.col(kept[i]).array() - mean(c)) / scale(c);
        }
        return out;
    }
};

struct PcaModel {
    Vector mean;                  // d
    Matrix components;            // n_components x d, orthonormal rows
    Vector explained_variance;    // non-increasing
    Vector explained_variance_ratio;
    double total_variance = 0.0;

    Eigen::Index n_components() const { return components.rows(); }
    Eigen::Index width() const { return components.cols(); }
};

/// PCA by thin SVD of the column-centred matrix. Each component's
/// largest-magnitude entry is made positive (first such entry on ties).
inline PcaModel pca_fit(const Matrix& data, Eigen::Index n_components) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (n < 2) throw DataError("pca_fit: need at least two rows");
    if (n_components < 1 || n_components > std::min(n, d)) {
        throw ConfigError("pca_fit: n_components must be in [1, " + std::to_string(std::min(n, d)) + "], got " +
                          std::to_string(n_components));
    }
    PcaModel m;
    m.mean = data.colwise().mean().transpose();
    const Matrix centered = data.rowwise() - m.mean.transpose();
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const Matrix& v = svd.matrixV();

    const double denom = static_cast<double>(n - 1);
    m.total_variance = sv.array().square().sum() / denom;
    m.components.resize(n_components, d);
    m.explained_variance.resize(n_components);
    for (Eigen::Index k = 0; k < n_components; ++k) {
        Vector comp = v.col(k);
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < d; ++i) {
            if (std::abs(comp(i)) > std::abs(comp(arg))) arg = i;
        }
        if (comp(arg) < 0.0) comp = -comp;
        m.components.row(k) = comp.transpose();
        m.explained_variance(k) = sv(k) * sv(k) / denom;
    }
    m.explained_variance_ratio = m.total_variance > 0.0 ? Vector(m.explained_variance / m.total_variance)
                                                         : Vector(Vector::Zero(n_components));
    return m;
}

inline Matrix pca_transform(const PcaModel& model, const Matrix& data) {
    if (data.cols() != model.width()) {
        throw DataError("pca_transform: data has " + std::to_string(data.cols()) + " columns, model expects " +
                        std::to_string(model.width()));
    }
    return (data.rowwise() - model.mean.transpose()) * model.components.transpose();
}

}  // namespace plotdyn
