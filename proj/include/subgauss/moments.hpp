#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "subgauss/bodies.hpp"
#include "subgauss/sampling.hpp"

namespace subgauss {

enum class EstimateMethod { MonteCarlo, Quadrature };

struct Estimate {
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    EstimateMethod method = EstimateMethod::MonteCarlo;
};

/// Largest moment order a Monte Carlo batch of N samples can estimate with
/// controlled relative variance: p <= ln N / ln 3.
double p_max_for_samples(std::int64_t N);

// (E|<X,y>|^p)^{1/p} from a batch. Accumulation happens in rescaled power
// space (max-subtraction) so p near the guard never overflows; the CI is a
// percentile block bootstrap with 200 resamples and a sub-seed derived
// from the batch seed.
Estimate marginal_lp_mc(const SampleBatch& batch, const Eigen::VectorXd& y,
                        double p, int threads = 1);

/// Same statistic for several orders at once; the projection is computed
/// once per direction.
std::vector<Estimate> marginal_lp_mc_multi(const SampleBatch& batch,
                                           const Eigen::VectorXd& y,
                                           const std::vector<double>& ps,
                                           int threads = 1);

/// Point estimate only, no bootstrap: the fast path for membership tests
/// inside Monte Carlo mass/volume loops.
double marginal_lp_raw(const SampleBatch& batch, const Eigen::VectorXd& y,
                       double p);

/// Quadrature path: p-th norm of a 1-d marginal density (log-space).
Estimate marginal_lp_quad(const MarginalDensity& density, double p);

struct ProfileEntry {
    double p = 0.0;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    EstimateMethod method = EstimateMethod::MonteCarlo;
};

struct MomentProfile {
    Eigen::VectorXd theta;
    int n = 0;
    double L_K = 0.0;
    bool truncated = false;  // MC path dropped grid points above p_max
    std::vector<ProfileEntry> entries;
};

struct Psi2Result {
    double value = 0.0;
    double attained_p = 0.0;
    bool truncated = false;
};

/// sup over the profile grid of value(p)/sqrt(p) with the maximizing p.
Psi2Result psi2_norm(const MomentProfile& profile);

/// P(|<X,theta>| >= t * E|<X,theta>|), Wilson 95% interval.
Estimate tail_prob_mc(const SampleBatch& batch, const Eigen::VectorXd& theta,
                      double t);
Estimate tail_prob_quad(const MarginalDensity& density, double t);

// ---- negative-moment functionals ------------------------------------------

enum class NegMomentFunctional { WMinusQ, IQ, GMinusQ };

struct NegMomentEstimate {
    NegMomentFunctional functional = NegMomentFunctional::WMinusQ;
    double q = 0.0;
    std::string subject;  // body or centroid-body descriptor, caller-set
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

using PolarNorm = std::function<double(const Eigen::VectorXd&)>;

/// W_{-q}: inverse-power mean of the polar norm over uniform sphere
/// directions; 0 < q <= n/2.
NegMomentEstimate neg_moment_sphere(const PolarNorm& polar_norm, double q, int n,
                                    std::int64_t N, std::uint64_t seed,
                                    int threads = 1);

/// G_{-q}: same with standard Gaussian directions.
NegMomentEstimate neg_moment_gaussian(const PolarNorm& polar_norm, double q, int n,
                                      std::int64_t N, std::uint64_t seed,
                                      int threads = 1);

/// Exact Gamma-ratio prefactor relating the two: G_{-q} = prefactor * W_{-q};
/// evaluated in log-Gamma space, 0 < q < n.
double gaussian_sphere_prefactor(int n, double q);

/// I_q: q-th power mean of |x| over the batch; negative q allowed down to
/// -n/2 (variance guard), q != 0.
NegMomentEstimate euclid_moment(const SampleBatch& batch, double q,
                                int threads = 1);

}  // namespace subgauss
