#pragma once

#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "subgauss/sampling.hpp"

namespace subgauss {

struct CovarianceEstimate {
    Eigen::MatrixXd sigma;
    double ci_frobenius = 0.0;  // bootstrap 95% bound on the Frobenius error
};

/// Sample covariance with a block-bootstrap Frobenius confidence bound
/// (200 resamples, sub-seed derived from the batch seed). Requires
/// N >= 10*n*n.
CovarianceEstimate estimate_covariance(const SampleBatch& batch, int threads = 1);

struct IsotropicTransform {
    Eigen::MatrixXd T;          // symmetric, det 1
    double L_K = 0.0;           // (det Sigma)^{1/(2n)}
    double det_check = 0.0;     // numeric determinant of T
    double cov_residual = -1.0; // ||Cov(TX) - L_K^2 Id||_F when measured
    nlohmann::json to_json() const;
};

/// T = (det Sigma)^{1/(2n)} Sigma^{-1/2} via symmetric eigendecomposition,
/// so T is the symmetric square root form and TK is isotropic.
IsotropicTransform isotropic_transform(const Eigen::MatrixXd& sigma);

/// Frobenius distance of the batch covariance from L_K^2 * Id.
double covariance_residual(const SampleBatch& batch, double L_K);

struct Subspace {
    Eigen::MatrixXd basis;  // ambient x dim, orthonormal columns
    int dim() const { return static_cast<int>(basis.cols()); }
    int ambient() const { return static_cast<int>(basis.rows()); }
};

/// Orthonormal basis of the orthogonal complement of the span of the given
/// vectors; throws DependentInput on rank deficiency.
Subspace orth_complement(const std::vector<Eigen::VectorXd>& vectors, int n);

}  // namespace subgauss
