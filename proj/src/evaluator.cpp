#include "subgauss/evaluator.hpp"

#include <cmath>

#include "subgauss/errors.hpp"
#include "subgauss/rng.hpp"

namespace subgauss {

std::vector<Estimate> MarginalEvaluator::eval_multi(
    const Eigen::VectorXd& y, const std::vector<double>& ps) const {
    std::vector<Estimate> out;
    out.reserve(ps.size());
    for (double p : ps) out.push_back(eval(y, p));
    return out;
}

McEvaluator::McEvaluator(const BodySpec& body, std::int64_t N, std::uint64_t seed,
                         SampleMethod method, HitAndRunOptions opts, int threads,
                         std::optional<Eigen::MatrixXd> transform)
    : body_(body),
      method_(method),
      opts_(opts),
      transform_(std::move(transform)),
      seed_(seed),
      threads_(threads),
      max_samples_(16 * N) {
    batch_ = sample_uniform(body, N, seed, method, opts, threads);
    if (transform_) batch_ = transform_batch(batch_, *transform_);
}

McEvaluator::McEvaluator(SampleBatch batch, int threads)
    : threads_(threads), max_samples_(batch.size()), batch_(std::move(batch)) {}

int McEvaluator::dim() const { return batch_.dim(); }

double McEvaluator::max_p() const { return p_max_for_samples(batch_.size()); }

Estimate McEvaluator::eval(const Eigen::VectorXd& y, double p) const {
    ++calls_;
    return marginal_lp_mc(batch_, y, p, threads_);
}

std::vector<Estimate> McEvaluator::eval_multi(const Eigen::VectorXd& y,
                                              const std::vector<double>& ps) const {
    calls_ += static_cast<std::int64_t>(ps.size());
    return marginal_lp_mc_multi(batch_, y, ps, threads_);
}

double McEvaluator::value_only(const Eigen::VectorXd& y, double p) const {
    ++calls_;
    return marginal_lp_raw(batch_, y, p);
}

bool McEvaluator::grow() {
    if (!body_) return false;
    const std::int64_t N = batch_.size();
    if (2 * N > max_samples_) return false;
    // Redrawing at double size reproduces the first N points exactly: direct
    // samples index per-point streams, and hit-and-run chains just run
    // longer while early emissions stay in place.
    SampleBatch doubled =
        sample_uniform(*body_, 2 * N, seed_, method_, opts_, threads_);
    if (transform_) doubled = transform_batch(doubled, *transform_);
    batch_ = std::move(doubled);
    return true;
}

QuadEvaluator::QuadEvaluator(const BodySpec& body, bool isotropic_frame)
    : body_(body) {
    auto iso = closed_form_isotropy(body);
    if (!iso)
        throw Unsupported("QuadEvaluator: no closed-form isotropy for " +
                          body.name());
    if (isotropic_frame) {
        diag_T_ = iso->first;
    } else {
        diag_T_ = Eigen::VectorXd::Ones(body.dim());
    }
    L_K_ = iso->second;
}

int QuadEvaluator::dim() const { return body_.dim(); }

bool QuadEvaluator::supports(const Eigen::VectorXd& y) const {
    const Eigen::VectorXd w = diag_T_.cwiseProduct(y);
    if (w.norm() < 1e-14) return false;
    return body_.marginal(w).has_value();
}

double QuadEvaluator::unit_norm(const Eigen::VectorXd& w, double p) const {
    // cache key: the marginal law class of the direction
    int axis = -1;
    if (body_.kind() != BodyKind::EuclideanBall) {
        for (int i = 0; i < w.size(); ++i) {
            if (std::abs(w[i]) > 1e-10 * w.norm()) {
                if (axis >= 0) { axis = -2; break; }
                axis = i;
            }
        }
        if (axis < 0)
            throw Unsupported("QuadEvaluator: no closed-form marginal along direction");
    }
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        for (const auto& kv : cache_)
            if (kv.first.first == axis && kv.first.second == p) return kv.second;
    }
    auto md = body_.marginal(w);
    if (!md)
        throw Unsupported("QuadEvaluator: no closed-form marginal along direction");
    const double v = marginal_lp_quad(*md, p).value;
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cache_.push_back({{axis, p}, v});
    return v;
}

Estimate QuadEvaluator::eval(const Eigen::VectorXd& y, double p) const {
    ++calls_;
    // ||<., y>||_{p, TK} = ||<., Ty>||_{p, K} for the diagonal transform.
    const Eigen::VectorXd w = diag_T_.cwiseProduct(y);
    const double norm = w.norm();
    if (norm < 1e-14) return {0.0, 0.0, 0.0, EstimateMethod::Quadrature};
    const double unit = unit_norm(w, p);
    Estimate e;
    e.method = EstimateMethod::Quadrature;
    e.value = norm * unit;
    e.lo = e.value * (1.0 - 1e-9);
    e.hi = e.value * (1.0 + 1e-9);
    return e;
}

double QuadEvaluator::value_only(const Eigen::VectorXd& y, double p) const {
    ++calls_;
    const Eigen::VectorXd w = diag_T_.cwiseProduct(y);
    const double norm = w.norm();
    if (norm < 1e-14) return 0.0;
    return norm * unit_norm(w, p);
}

AutoEvaluator::AutoEvaluator(const BodySpec& body, std::shared_ptr<McEvaluator> mc)
    : body_(body), mc_(std::move(mc)) {}

int AutoEvaluator::dim() const { return body_.dim(); }

Estimate AutoEvaluator::eval(const Eigen::VectorXd& y, double p) const {
    ++calls_;
    const double norm = y.norm();
    if (norm > 1e-14) {
        auto md = body_.marginal(y);
        if (md) {
            Estimate e = marginal_lp_quad(*md, p);
            e.value *= norm;
            e.lo *= norm;
            e.hi *= norm;
            return e;
        }
    }
    if (p > mc_->max_p())
        throw PTooLargeForBudget("auto evaluator: p above Monte Carlo guard");
    return mc_->eval(y, p);
}

std::optional<std::pair<Eigen::VectorXd, double>> closed_form_isotropy(
    const BodySpec& body) {
    const int n = body.dim();
    auto sigma_along = [&](const Eigen::VectorXd& dir) {
        auto md = body.marginal(dir);
        if (!md) return -1.0;
        return marginal_lp_quad(*md, 2.0).value;
    };
    switch (body.kind()) {
        case BodyKind::Cube:
        case BodyKind::EuclideanBall:
        case BodyKind::LpBall: {
            Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
            e1[0] = 1.0;
            const double s = sigma_along(e1);
            if (s <= 0) return std::nullopt;
            return std::make_pair(Eigen::VectorXd::Ones(n), s);
        }
        case BodyKind::Cone: {
            if (body.cone_base().kind() != BodyKind::Cube) return std::nullopt;
            Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n), en = Eigen::VectorXd::Zero(n);
            e1[0] = 1.0;
            en[n - 1] = 1.0;
            const double sb = sigma_along(e1);
            const double sa = sigma_along(en);
            if (sb <= 0 || sa <= 0) return std::nullopt;
            // T = det-1 diagonal whitening; L_K = (prod sigma)^{1/n}.
            const double L = std::exp(((n - 1) * std::log(sb) + std::log(sa)) / n);
            Eigen::VectorXd d(n);
            d.head(n - 1).setConstant(L / sb);
            d[n - 1] = L / sa;
            return std::make_pair(d, L);
        }
        default:
            return std::nullopt;
    }
}

MomentProfile make_profile(const MarginalEvaluator& eval,
                           const Eigen::VectorXd& theta,
                           const std::vector<double>& grid, double L_K) {
    MomentProfile prof;
    prof.theta = theta;
    prof.n = eval.dim();
    prof.L_K = L_K;
    std::vector<double> usable;
    for (double p : grid) {
        if (p <= eval.max_p())
            usable.push_back(p);
        else
            prof.truncated = true;
    }
    const auto ests = eval.eval_multi(theta, usable);
    for (std::size_t i = 0; i < usable.size(); ++i) {
        prof.entries.push_back(
            {usable[i], ests[i].value, ests[i].lo, ests[i].hi, ests[i].method});
    }
    return prof;
}

std::vector<double> half_dyadic_grid(double limit) {
    std::vector<double> grid;
    const double root2 = std::sqrt(2.0);
    for (int j = 0; j < 400; ++j) {
        // exact powers of two at even j so grid lookups at p = 2 are exact
        const double p = (j % 2 == 0) ? std::ldexp(1.0, j / 2)
                                      : std::ldexp(root2, (j - 1) / 2);
        if (p > limit * (1.0 + 1e-12)) break;
        grid.push_back(p);
    }
    return grid;
}

}  // namespace subgauss
