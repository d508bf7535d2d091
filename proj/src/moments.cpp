#include "subgauss/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "subgauss/errors.hpp"
#include "subgauss/parallel.hpp"
#include "subgauss/quadrature.hpp"
#include "subgauss/rng.hpp"

namespace subgauss {

namespace {

constexpr int kResamples = 200;
constexpr double kWilsonZ = 1.959963985;  // 95%

std::uint64_t fnv_mix(std::uint64_t h, const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t bootstrap_seed(std::uint64_t base, const Eigen::VectorXd& y, double p) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    h = fnv_mix(h, &base, sizeof(base));
    h = fnv_mix(h, y.data(), sizeof(double) * y.size());
    h = fnv_mix(h, &p, sizeof(p));
    return h;
}

struct PowerMean {
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// (mean of v_i^p)^{1/p} with percentile block bootstrap. Works for
// negative p too; everything accumulates as exp(p*log v - shift).
PowerMean power_mean_ci(const std::vector<double>& log_v, double p,
                        std::uint64_t boot_seed, int threads) {
    const std::int64_t N = static_cast<std::int64_t>(log_v.size());
    double shift = -std::numeric_limits<double>::infinity();
    for (double t : log_v) shift = std::max(shift, p * t);
    PowerMean out;
    if (!std::isfinite(shift)) {  // all values zero
        return out;
    }

    const int K = static_cast<int>(std::min<std::int64_t>(N, 256));
    std::vector<double> block_sum(K, 0.0);
    std::vector<double> block_cnt(K, 0.0);
    parallel_for(K, threads, [&](std::int64_t kb, std::int64_t ke) {
        for (std::int64_t k = kb; k < ke; ++k) {
            const std::int64_t begin = N * k / K;
            const std::int64_t end = N * (k + 1) / K;
            double s = 0.0;
            for (std::int64_t i = begin; i < end; ++i)
                s += std::exp(p * log_v[i] - shift);
            block_sum[k] = s;
            block_cnt[k] = static_cast<double>(end - begin);
        }
    });
    double total = 0.0;
    for (double s : block_sum) total += s;
    out.value = std::exp((shift + std::log(total / N)) / p);

    CounterRng rng(boot_seed, stream::id(stream::kBootstrap, 0));
    std::vector<double> vals(kResamples);
    for (int r = 0; r < kResamples; ++r) {
        double s = 0.0, c = 0.0;
        for (int k = 0; k < K; ++k) {
            const int b = std::min(static_cast<int>(rng.uniform() * K), K - 1);
            s += block_sum[b];
            c += block_cnt[b];
        }
        vals[r] = s > 0 ? std::exp((shift + std::log(s / c)) / p)
                        : 0.0;
    }
    std::sort(vals.begin(), vals.end());
    out.lo = vals[static_cast<int>(0.025 * (kResamples - 1))];
    out.hi = vals[static_cast<int>(0.975 * (kResamples - 1) + 0.5)];
    return out;
}

std::vector<double> log_abs_projection(const SampleBatch& batch,
                                       const Eigen::VectorXd& y) {
    if (y.size() != batch.dim())
        throw DimensionMismatch("marginal_lp: direction dimension mismatch");
    Eigen::VectorXd z = batch.points * y;
    std::vector<double> out(z.size());
    for (std::int64_t i = 0; i < z.size(); ++i) {
        const double a = std::abs(z[i]);
        out[i] = a > 0 ? std::log(a) : -std::numeric_limits<double>::infinity();
    }
    return out;
}

Estimate wilson(double k, double N) {
    const double z = kWilsonZ;
    const double phat = k / N;
    const double denom = 1.0 + z * z / N;
    const double center = (phat + z * z / (2 * N)) / denom;
    const double half =
        z * std::sqrt(phat * (1 - phat) / N + z * z / (4 * N * N)) / denom;
    Estimate e;
    e.value = phat;
    e.lo = std::max(0.0, center - half);
    e.hi = std::min(1.0, center + half);
    e.method = EstimateMethod::MonteCarlo;
    return e;
}

}  // namespace

double p_max_for_samples(std::int64_t N) {
    return std::log(static_cast<double>(N)) / std::log(3.0);
}

Estimate marginal_lp_mc(const SampleBatch& batch, const Eigen::VectorXd& y,
                        double p, int threads) {
    return marginal_lp_mc_multi(batch, y, {p}, threads).front();
}

std::vector<Estimate> marginal_lp_mc_multi(const SampleBatch& batch,
                                           const Eigen::VectorXd& y,
                                           const std::vector<double>& ps,
                                           int threads) {
    const double pmax = p_max_for_samples(batch.size());
    for (double p : ps) {
        if (!(p >= 1.0)) throw InvalidParam("marginal_lp: p must be >= 1");
        if (p > pmax)
            throw PTooLargeForBudget("marginal_lp: p = " + std::to_string(p) +
                                     " exceeds p_max(N) = " + std::to_string(pmax));
    }
    const std::vector<double> log_z = log_abs_projection(batch, y);
    std::vector<Estimate> out;
    out.reserve(ps.size());
    for (double p : ps) {
        const PowerMean pm =
            power_mean_ci(log_z, p, bootstrap_seed(batch.seed, y, p), threads);
        out.push_back({pm.value, pm.lo, pm.hi, EstimateMethod::MonteCarlo});
    }
    return out;
}

double marginal_lp_raw(const SampleBatch& batch, const Eigen::VectorXd& y,
                       double p) {
    if (!(p >= 1.0)) throw InvalidParam("marginal_lp: p must be >= 1");
    if (p > p_max_for_samples(batch.size()))
        throw PTooLargeForBudget("marginal_lp: p exceeds p_max(N)");
    const std::vector<double> log_z = log_abs_projection(batch, y);
    double shift = -std::numeric_limits<double>::infinity();
    for (double t : log_z) shift = std::max(shift, p * t);
    if (!std::isfinite(shift)) return 0.0;
    double total = 0.0;
    for (double t : log_z) total += std::exp(p * t - shift);
    return std::exp((shift + std::log(total / static_cast<double>(log_z.size()))) / p);
}

Estimate marginal_lp_quad(const MarginalDensity& density, double p) {
    if (!(p >= 1.0)) throw InvalidParam("marginal_lp: p must be >= 1");
    const double v = lp_norm_from_density(density.log_pdf, density.lo, density.hi, p);
    Estimate e;
    e.value = v;
    e.lo = v * (1.0 - 1e-9);
    e.hi = v * (1.0 + 1e-9);
    e.method = EstimateMethod::Quadrature;
    return e;
}

Psi2Result psi2_norm(const MomentProfile& profile) {
    if (profile.entries.empty()) throw EmptyProfile("psi2_norm: empty profile");
    Psi2Result r;
    r.truncated = profile.truncated;
    for (const auto& e : profile.entries) {
        const double ratio = e.value / std::sqrt(e.p);
        if (ratio > r.value) {
            r.value = ratio;
            r.attained_p = e.p;
        }
    }
    return r;
}

Estimate tail_prob_mc(const SampleBatch& batch, const Eigen::VectorXd& theta,
                      double t) {
    if (theta.size() != batch.dim())
        throw DimensionMismatch("tail_prob: dimension mismatch");
    Eigen::VectorXd z = (batch.points * theta).cwiseAbs();
    const double m1 = z.mean();
    const double cut = t * m1;
    double k = 0.0;
    for (std::int64_t i = 0; i < z.size(); ++i)
        if (z[i] >= cut) k += 1.0;
    return wilson(k, static_cast<double>(z.size()));
}

Estimate tail_prob_quad(const MarginalDensity& density, double t) {
    const double m1 =
        std::exp(log_abs_moment(density.log_pdf, density.lo, density.hi, 1.0));
    const double cut = t * m1;
    auto pdf = [&](double x) { return density.pdf(x); };
    double p = 0.0;
    if (cut < density.hi)
        p += integrate(pdf, std::max(density.lo, cut), density.hi, 1e-12, 1e-14);
    if (-cut > density.lo)
        p += integrate(pdf, density.lo, std::min(density.hi, -cut), 1e-12, 1e-14);
    Estimate e;
    e.value = p;
    e.lo = std::max(0.0, p - 1e-10);
    e.hi = std::min(1.0, p + 1e-10);
    e.method = EstimateMethod::Quadrature;
    return e;
}

namespace {

NegMomentEstimate neg_moment_impl(const PolarNorm& polar_norm, double q, int n,
                                  std::int64_t N, std::uint64_t seed, bool gaussian,
                                  int threads) {
    if (!(q > 0.0) || q > 0.5 * n)
        throw QOutOfRange("neg_moment: need 0 < q <= n/2");
    if (N < 16) throw InsufficientSamples("neg_moment: N too small");

    std::vector<double> log_norm(N);
    parallel_for(N, threads, [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t i = begin; i < end; ++i) {
            CounterRng rng(seed, stream::id(stream::kSampler,
                                            static_cast<std::uint64_t>(i)));
            const Eigen::VectorXd u =
                gaussian ? rng.normal_vector(n) : rng.unit_vector(n);
            const double v = polar_norm(u);
            log_norm[i] = v > 0 ? std::log(v)
                                : -std::numeric_limits<double>::infinity();
        }
    });
    Eigen::VectorXd dummy = Eigen::VectorXd::Constant(1, q);
    const PowerMean pm =
        power_mean_ci(log_norm, -q, bootstrap_seed(seed, dummy, -q), threads);
    NegMomentEstimate e;
    e.functional =
        gaussian ? NegMomentFunctional::GMinusQ : NegMomentFunctional::WMinusQ;
    e.q = q;
    e.value = pm.value;
    e.lo = pm.lo;
    e.hi = pm.hi;
    return e;
}

}  // namespace

NegMomentEstimate neg_moment_sphere(const PolarNorm& polar_norm, double q, int n,
                                    std::int64_t N, std::uint64_t seed, int threads) {
    return neg_moment_impl(polar_norm, q, n, N, seed, false, threads);
}

NegMomentEstimate neg_moment_gaussian(const PolarNorm& polar_norm, double q, int n,
                                      std::int64_t N, std::uint64_t seed,
                                      int threads) {
    return neg_moment_impl(polar_norm, q, n, N, seed, true, threads);
}

double gaussian_sphere_prefactor(int n, double q) {
    if (!(q > 0.0) || !(q < n)) throw QOutOfRange("gaussian_sphere_prefactor: need 0 < q < n");
    return std::exp(0.5 * std::log(2.0) +
                    (std::lgamma(0.5 * n) - std::lgamma(0.5 * (n - q))) / q);
}

NegMomentEstimate euclid_moment(const SampleBatch& batch, double q, int threads) {
    const int n = batch.dim();
    if (q == 0.0 || q <= -static_cast<double>(n))
        throw QOutOfRange("euclid_moment: need q > -n, q != 0");
    if (q < -0.5 * n)
        throw QOutOfRange("euclid_moment: Monte Carlo path requires q >= -n/2");
    std::vector<double> log_r(batch.size());
    for (std::int64_t i = 0; i < batch.size(); ++i) {
        const double r = batch.points.row(i).norm();
        log_r[i] = r > 0 ? std::log(r) : -std::numeric_limits<double>::infinity();
    }
    Eigen::VectorXd dummy = Eigen::VectorXd::Constant(1, q);
    const PowerMean pm =
        power_mean_ci(log_r, q, bootstrap_seed(batch.seed, dummy, q), threads);
    NegMomentEstimate e;
    e.functional = NegMomentFunctional::IQ;
    e.q = q;
    e.value = pm.value;
    e.lo = pm.lo;
    e.hi = pm.hi;
    return e;
}

}  // namespace subgauss
