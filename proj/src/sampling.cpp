#include "subgauss/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "subgauss/errors.hpp"
#include "subgauss/parallel.hpp"
#include "subgauss/rng.hpp"

namespace subgauss {

namespace {

Eigen::VectorXd direct_point(const BodySpec& body, CounterRng& rng) {
    const int n = body.dim();
    Eigen::VectorXd x(n);
    switch (body.kind()) {
        case BodyKind::Cube: {
            for (int i = 0; i < n; ++i) x[i] = rng.uniform() - 0.5;
            return x;
        }
        case BodyKind::EuclideanBall: {
            Eigen::VectorXd g = rng.normal_vector(n);
            const double gn = g.norm();
            const double u = std::pow(rng.uniform_open(), 1.0 / n);
            return body.radius() * u / gn * g;
        }
        case BodyKind::LpBall: {
            const double p = body.lp_exponent();
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                const double gam = rng.gamma(1.0 / p);
                const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                x[i] = sign * std::pow(gam, 1.0 / p);
                sum += gam;
            }
            const double w = rng.exponential();
            return body.radius() * x / std::pow(sum + w, 1.0 / p);
        }
        case BodyKind::Simplex: {
            const double s = body.simplex_scale();
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                x[i] = rng.exponential();
                total += x[i];
            }
            total += rng.exponential();
            const double a = s / (n + 1.0);
            for (int i = 0; i < n; ++i) x[i] = s * x[i] / total - a;
            return x;
        }
        case BodyKind::Cone: {
            const double h = body.cone_height();
            const double lam = body.cone_scale();
            const double s = h * (1.0 - std::pow(rng.uniform_open(), 1.0 / n));
            Eigen::VectorXd yb = direct_point(body.cone_base(), rng);
            x.head(n - 1) = lam * (1.0 - s / h) * yb;
            x[n - 1] = lam * s - body.cone_axis_shift();
            return x;
        }
        default:
            throw Unsupported("no direct sampler for " + body.name());
    }
}

void hit_and_run_chain(const BodySpec& body, std::uint64_t seed, int chain,
                       int burn_in, int thinning, Eigen::MatrixXd& out,
                       std::int64_t first_row, std::int64_t stride,
                       std::int64_t rows) {
    const int n = body.dim();
    CounterRng rng(seed, stream::id(stream::kChain, static_cast<std::uint64_t>(chain)));
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    auto step = [&] {
        const Eigen::VectorXd u = rng.unit_vector(n);
        const Chord c = body.chord(x, u);
        const double t = rng.uniform(c.lo, c.hi);
        x += t * u;
    };
    for (int i = 0; i < burn_in; ++i) step();
    for (std::int64_t r = 0; r < rows; ++r) {
        for (int i = 0; i < thinning; ++i) step();
        out.row(first_row + r * stride) = x.transpose();
    }
}

}  // namespace

SampleBatch sample_uniform(const BodySpec& body, std::int64_t N, std::uint64_t seed,
                           SampleMethod method, const HitAndRunOptions& opts,
                           int threads) {
    if (N < 1) throw InvalidParam("sample_uniform: N must be >= 1");
    const int n = body.dim();
    SampleBatch batch;
    batch.points.resize(N, n);
    batch.seed = seed;
    batch.method = method;
    batch.source = body.name();

    if (method == SampleMethod::Direct) {
        if (!body.has_direct_sampler())
            throw Unsupported("direct sampling unavailable for " + body.name());
        parallel_for(N, threads, [&](std::int64_t begin, std::int64_t end) {
            for (std::int64_t i = begin; i < end; ++i) {
                CounterRng rng(seed, stream::id(stream::kSampler,
                                                static_cast<std::uint64_t>(i)));
                batch.points.row(i) = direct_point(body, rng).transpose();
            }
        });
        return batch;
    }

    // Hit-and-run. The chain count is a property of the batch, not of the
    // machine, so scheduling cannot change the output.
    if (!body.contains(Eigen::VectorXd::Zero(n)))
        throw NoInteriorPoint("hit-and-run start point (origin) not inside body");
    const int min_burn = 10 * n;
    int burn_in = opts.burn_in;
    if (burn_in < 0) burn_in = std::max(min_burn, 1000);
    if (burn_in < min_burn)
        throw BadBurnIn("burn_in below 10*n = " + std::to_string(min_burn));
    const int thinning = opts.thinning < 0 ? n : std::max(1, opts.thinning);
    const int chains = std::max(1, opts.chains);

    parallel_for(chains, threads, [&](std::int64_t cb, std::int64_t ce) {
        for (std::int64_t c = cb; c < ce; ++c) {
            const std::int64_t rows = (N - c + chains - 1) / chains;
            if (rows <= 0) continue;
            hit_and_run_chain(body, seed, static_cast<int>(c), burn_in, thinning,
                              batch.points, c, chains, rows);
        }
    });
    return batch;
}

SampleBatch sample_gaussian(int n, std::int64_t N, std::uint64_t seed, int threads) {
    if (n < 1 || N < 1) throw InvalidParam("sample_gaussian: n, N must be >= 1");
    SampleBatch batch;
    batch.points.resize(N, n);
    batch.seed = seed;
    batch.method = SampleMethod::Direct;
    batch.source = "gaussian";
    parallel_for(N, threads, [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t i = begin; i < end; ++i) {
            CounterRng rng(seed, stream::id(stream::kSampler,
                                            static_cast<std::uint64_t>(i)));
            for (int k = 0; k < n; ++k) batch.points(i, k) = rng.normal();
        }
    });
    return batch;
}

SampleBatch transform_batch(const SampleBatch& batch, const Eigen::MatrixXd& T) {
    if (T.rows() != batch.dim() || T.cols() != batch.dim())
        throw DimensionMismatch("transform_batch: shape mismatch");
    SampleBatch out = batch;
    out.points = batch.points * T.transpose();
    return out;
}

namespace {

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

}  // namespace

ValidationReport validate_sampler(const BodySpec& body, const SampleBatch& reference,
                                  const SampleBatch& trial) {
    if (reference.dim() != body.dim() || trial.dim() != body.dim())
        throw DimensionMismatch("validate_sampler: dimension mismatch");
    const int n = body.dim();
    constexpr int kDirections = 20;
    constexpr double kCritical99 = 1.6276;  // sqrt(-ln(0.005)/2)

    ValidationReport report;
    CounterRng rng(reference.seed * 0x9E3779B97F4A7C15ULL + trial.seed,
                   stream::id(stream::kValidate, 0));
    const double ks_crit =
        kCritical99 *
        std::sqrt((reference.size() + trial.size()) /
                  (static_cast<double>(reference.size()) * trial.size()));

    for (int d = 0; d < kDirections; ++d) {
        const Eigen::VectorXd dir = rng.unit_vector(n);
        Eigen::VectorXd za = reference.points * dir;
        Eigen::VectorXd zb = trial.points * dir;
        DirectionCheck check;
        check.ks_stat = ks_two_sample(
            std::vector<double>(za.data(), za.data() + za.size()),
            std::vector<double>(zb.data(), zb.data() + zb.size()));
        check.ks_critical = ks_crit;
        check.flagged = check.ks_stat > ks_crit;
        const double ma = za.mean(), mb = zb.mean();
        const double va = (za.array() - ma).square().sum() / (za.size() - 1);
        const double vb = (zb.array() - mb).square().sum() / (zb.size() - 1);
        const double se = std::sqrt(va / za.size() + vb / zb.size());
        check.mean_gap_sigmas = se > 0 ? std::abs(ma - mb) / se : 0.0;
        check.var_ratio = vb > 0 ? va / vb : std::numeric_limits<double>::infinity();
        report.max_ks = std::max(report.max_ks, check.ks_stat);
        if (check.flagged) ++report.flagged_count;
        report.directions.push_back(check);
    }
    report.pass = report.flagged_count == 0;
    return report;
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json dirs = nlohmann::json::array();
    for (const auto& d : directions) {
        dirs.push_back({{"ks", d.ks_stat},
                        {"ks_critical", d.ks_critical},
                        {"flagged", d.flagged},
                        {"mean_gap_sigmas", d.mean_gap_sigmas},
                        {"var_ratio", d.var_ratio}});
    }
    return {{"pass", pass},
            {"flagged_count", flagged_count},
            {"max_ks", max_ks},
            {"directions", dirs}};
}

MarginalDensity numerical_marginal(const SampleBatch& batch,
                                   const Eigen::VectorXd& theta) {
    if (theta.size() != batch.dim())
        throw DimensionMismatch("numerical_marginal: dimension mismatch");
    Eigen::VectorXd dir = theta.normalized();
    Eigen::VectorXd z = batch.points * dir;
    std::vector<double> v(z.data(), z.data() + z.size());
    std::sort(v.begin(), v.end());
    const double N = static_cast<double>(v.size());
    const double mean = z.mean();
    const double sd = std::sqrt((z.array() - mean).square().sum() / (N - 1));
    const double iqr = v[static_cast<std::size_t>(0.75 * (N - 1))] -
                       v[static_cast<std::size_t>(0.25 * (N - 1))];
    // Silverman's rule of thumb.
    double bw = 0.9 * std::min(sd, iqr / 1.34) * std::pow(N, -0.2);
    if (bw <= 0) bw = sd > 0 ? sd * std::pow(N, -0.2) : 1e-3;

    auto points = std::make_shared<std::vector<double>>(std::move(v));
    MarginalDensity md;
    md.direction = dir;
    md.form = DensityForm::NumericalProjection;
    md.bandwidth = bw;
    md.lo = points->front() - 5.0 * bw;
    md.hi = points->back() + 5.0 * bw;
    md.log_pdf = [points, bw, N](double t) {
        // log of the kernel mixture with max-rescaling
        double best = std::numeric_limits<double>::lowest();
        for (double p : *points) {
            const double d = (t - p) / bw;
            best = std::max(best, -0.5 * d * d);
        }
        double acc = 0.0;
        for (double p : *points) {
            const double d = (t - p) / bw;
            acc += std::exp(-0.5 * d * d - best);
        }
        return best + std::log(acc) - std::log(N * bw) -
               0.5 * std::log(2.0 * M_PI);
    };
    return md;
}

void write_batch_bin(const std::string& path, const SampleBatch& batch) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SubgaussError("cannot open " + path);
    const std::uint32_t N = static_cast<std::uint32_t>(batch.size());
    const std::uint32_t n = static_cast<std::uint32_t>(batch.dim());
    out.write(reinterpret_cast<const char*>(&N), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    // Row-major stream; Eigen default storage is column-major.
    std::vector<double> row(n);
    for (std::int64_t i = 0; i < batch.size(); ++i) {
        for (std::uint32_t k = 0; k < n; ++k) row[k] = batch.points(i, k);
        out.write(reinterpret_cast<const char*>(row.data()), 8 * n);
    }
}

SampleBatch read_batch_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SubgaussError("cannot open " + path);
    std::uint32_t N = 0, n = 0;
    in.read(reinterpret_cast<char*>(&N), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    SampleBatch batch;
    batch.points.resize(N, n);
    std::vector<double> row(n);
    for (std::uint32_t i = 0; i < N; ++i) {
        in.read(reinterpret_cast<char*>(row.data()), 8 * n);
        for (std::uint32_t k = 0; k < n; ++k) batch.points(i, k) = row[k];
    }
    if (!in) throw SubgaussError("truncated batch file " + path);
    return batch;
}

void write_batch_csv(const std::string& path, const SampleBatch& batch) {
    std::ofstream out(path);
    if (!out) throw SubgaussError("cannot open " + path);
    char buf[32];
    for (std::int64_t i = 0; i < batch.size(); ++i) {
        for (int k = 0; k < batch.dim(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", batch.points(i, k));
            out << buf << (k + 1 < batch.dim() ? "," : "\n");
        }
    }
}

}  // namespace subgauss
