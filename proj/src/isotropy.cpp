#include "subgauss/isotropy.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "subgauss/errors.hpp"
#include "subgauss/parallel.hpp"
#include "subgauss/rng.hpp"

namespace subgauss {

CovarianceEstimate estimate_covariance(const SampleBatch& batch, int threads) {
    const std::int64_t N = batch.size();
    const int n = batch.dim();
    if (N < 10LL * n * n)
        throw InsufficientSamples("estimate_covariance: need N >= 10*n^2 = " +
                                  std::to_string(10LL * n * n));

    const Eigen::RowVectorXd mean = batch.points.colwise().mean();
    Eigen::MatrixXd centered = batch.points.rowwise() - mean;
    Eigen::MatrixXd sigma =
        (centered.transpose() * centered) / static_cast<double>(N);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    const double lmax = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() < 1e-12 * lmax)
        throw SingularCovariance("estimate_covariance: near-singular covariance");

    // Block bootstrap over contiguous row blocks: per-block first/second
    // moment partials, then 200 resamples of block indices.
    const int K = static_cast<int>(std::min<std::int64_t>(N, 256));
    std::vector<Eigen::MatrixXd> sec(K, Eigen::MatrixXd::Zero(n, n));
    std::vector<Eigen::VectorXd> fst(K, Eigen::VectorXd::Zero(n));
    std::vector<double> cnt(K, 0.0);
    parallel_for(K, threads, [&](std::int64_t kb, std::int64_t ke) {
        for (std::int64_t k = kb; k < ke; ++k) {
            const std::int64_t begin = N * k / K;
            const std::int64_t end = N * (k + 1) / K;
            for (std::int64_t i = begin; i < end; ++i) {
                const Eigen::VectorXd x = batch.points.row(i).transpose();
                sec[k].noalias() += x * x.transpose();
                fst[k] += x;
            }
            cnt[k] = static_cast<double>(end - begin);
        }
    });

    constexpr int kResamples = 200;
    std::vector<double> dist(kResamples);
    CounterRng rng(batch.seed, stream::id(stream::kBootstrap, 1));
    for (int r = 0; r < kResamples; ++r) {
        Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd s1 = Eigen::VectorXd::Zero(n);
        double c = 0.0;
        for (int k = 0; k < K; ++k) {
            const int pick = static_cast<int>(rng.uniform() * K);
            const int b = std::min(pick, K - 1);
            s2 += sec[b];
            s1 += fst[b];
            c += cnt[b];
        }
        const Eigen::VectorXd m = s1 / c;
        const Eigen::MatrixXd cov = s2 / c - m * m.transpose();
        dist[r] = (cov - sigma).norm();
    }
    std::sort(dist.begin(), dist.end());
    CovarianceEstimate out;
    out.sigma = std::move(sigma);
    out.ci_frobenius = dist[static_cast<int>(0.95 * (kResamples - 1))];
    return out;
}

IsotropicTransform isotropic_transform(const Eigen::MatrixXd& sigma) {
    const int n = static_cast<int>(sigma.rows());
    if (sigma.cols() != n) throw DimensionMismatch("isotropic_transform: not square");
    if ((sigma - sigma.transpose()).norm() > 1e-10 * std::max(1.0, sigma.norm()))
        throw InvalidParam("isotropic_transform: matrix not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    const Eigen::VectorXd lam = es.eigenvalues();
    if (lam.minCoeff() <= 1e-12 * std::max(0.0, lam.maxCoeff()))
        throw SingularCovariance("isotropic_transform: singular covariance");

    double log_det = 0.0;
    for (int i = 0; i < n; ++i) log_det += std::log(lam[i]);
    const double scale = std::exp(log_det / (2.0 * n));

    Eigen::VectorXd inv_sqrt(n);
    for (int i = 0; i < n; ++i) inv_sqrt[i] = scale / std::sqrt(lam[i]);
    IsotropicTransform t;
    t.T = es.eigenvectors() * inv_sqrt.asDiagonal() *
          es.eigenvectors().transpose();
    t.L_K = scale;
    t.det_check = Eigen::PartialPivLU<Eigen::MatrixXd>(t.T).determinant();
    return t;
}

double covariance_residual(const SampleBatch& batch, double L_K) {
    const Eigen::RowVectorXd mean = batch.points.colwise().mean();
    Eigen::MatrixXd centered = batch.points.rowwise() - mean;
    Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(batch.size());
    cov.diagonal().array() -= L_K * L_K;
    return cov.norm();
}

nlohmann::json IsotropicTransform::to_json() const {
    std::vector<double> rows;
    rows.reserve(T.size());
    for (int i = 0; i < T.rows(); ++i)
        for (int j = 0; j < T.cols(); ++j) rows.push_back(T(i, j));
    return {{"n", T.rows()},
            {"matrix_row_major", rows},
            {"L_K", L_K},
            {"det_check", det_check},
            {"cov_residual", cov_residual}};
}

Subspace orth_complement(const std::vector<Eigen::VectorXd>& vectors, int n) {
    const int k = static_cast<int>(vectors.size());
    if (k == 0) {
        Subspace s;
        s.basis = Eigen::MatrixXd::Identity(n, n);
        return s;
    }
    Eigen::MatrixXd A(n, k);
    for (int j = 0; j < k; ++j) {
        if (vectors[j].size() != n)
            throw DimensionMismatch("orth_complement: vector dimension mismatch");
        A.col(j) = vectors[j];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_qr(A);
    rank_qr.setThreshold(1e-10);
    if (rank_qr.rank() < k)
        throw DependentInput("orth_complement: input vectors are dependent");

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ();
    Subspace s;
    s.basis = Q.rightCols(n - k);
    return s;
}

}  // namespace subgauss
