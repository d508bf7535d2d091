#include "subgauss/construction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "subgauss/errors.hpp"
#include "subgauss/exactpoly.hpp"
#include "subgauss/isotropy.hpp"
#include "subgauss/rng.hpp"

namespace subgauss {

GridD GridD::make(int n, double c0, double C0, double eps) {
    if (!(c0 > 0.0) || c0 > 0.25) throw InvalidParam("GridD: c0 must be in (0, 1/4]");
    if (!(C0 > 0.0) || !(eps > 0.0)) throw InvalidParam("GridD: C0, eps must be > 0");
    if (c0 * n < 1.0)
        throw DimensionTooSmall("GridD: c0*n = " + std::to_string(c0 * n) +
                                " < 1; dimension too small for the dyadic grid");
    GridD g;
    g.n = n;
    g.c0 = c0;
    g.C0 = C0;
    g.eps = eps;
    for (double p = 1.0; p <= c0 * n * (1.0 + 1e-12); p *= 2.0)
        g.exponents.push_back(p);
    return g;
}

nlohmann::json GridD::to_json() const {
    return {{"n", n}, {"c0", c0}, {"C0", C0}, {"eps", eps}, {"exponents", exponents}};
}

namespace {

double threshold_A(double p, const GridD& g, double L_K) {
    return g.C0 * std::sqrt(static_cast<double>(g.n) * p) * L_K;
}

double threshold_B(double p, const GridD& g, double L_K) {
    return g.eps * std::sqrt(static_cast<double>(g.n) * p) * L_K;
}

}  // namespace

Membership test_Ap(const Estimate& e, double p, const GridD& grid, double L_K) {
    const double thr = threshold_A(p, grid, L_K);
    if (e.hi <= thr) return Membership::In;
    if (e.lo > thr) return Membership::Out;
    return Membership::Indeterminate;
}

Membership test_Bp(const Estimate& e, double p, const GridD& grid, double L_K) {
    const double thr = threshold_B(p, grid, L_K);
    if (e.hi <= thr) return Membership::In;
    if (e.lo > thr) return Membership::Out;
    return Membership::Indeterminate;
}

bool in_Ap(const Eigen::VectorXd& y, double p, const GridD& grid, double L_K,
           MarginalEvaluator& eval) {
    Membership m = test_Ap(eval.eval(y, p), p, grid, L_K);
    if (m == Membership::Indeterminate && eval.grow())
        m = test_Ap(eval.eval(y, p), p, grid, L_K);
    return m == Membership::In;  // indeterminate resolves to "outside"
}

bool in_Bp(const Eigen::VectorXd& y, double p, const GridD& grid, double L_K,
           MarginalEvaluator& eval) {
    Membership m = test_Bp(eval.eval(y, p), p, grid, L_K);
    if (m == Membership::Indeterminate && eval.grow())
        m = test_Bp(eval.eval(y, p), p, grid, L_K);
    return m != Membership::Out;  // indeterminate resolves to "inside B"
}

namespace {

enum class Verdict { Accept, Reject, Indeterminate };

struct CandidateTest {
    Verdict verdict = Verdict::Reject;
    bool rejected_by_A = false;
    bool rejected_by_B = false;
    double max_A_ratio = 0.0;  // max_p value / (sqrt(np) L_K)
    std::vector<Estimate> estimates;
};

CandidateTest test_candidate(const Eigen::VectorXd& y, const GridD& grid,
                             double L_K, MarginalEvaluator& eval) {
    CandidateTest out;
    out.estimates = eval.eval_multi(y, grid.exponents);
    bool indeterminate = false;
    for (std::size_t i = 0; i < grid.exponents.size(); ++i) {
        const double p = grid.exponents[i];
        const Estimate& e = out.estimates[i];
        out.max_A_ratio =
            std::max(out.max_A_ratio, e.value / (threshold_A(p, grid, L_K) / grid.C0));
        const Membership a = test_Ap(e, p, grid, L_K);
        if (a == Membership::Out) {
            out.verdict = Verdict::Reject;
            out.rejected_by_A = true;
            return out;
        }
        const Membership b = test_Bp(e, p, grid, L_K);
        if (b == Membership::In) {
            out.verdict = Verdict::Reject;
            out.rejected_by_B = true;
            return out;
        }
        if (a == Membership::Indeterminate || b == Membership::Indeterminate)
            indeterminate = true;
    }
    out.verdict = indeterminate ? Verdict::Indeterminate : Verdict::Accept;
    return out;
}

// Projected coordinate descent on the unit sphere of the subspace,
// minimizing max_p ||<.,y>||_p / (sqrt(p) L_K) at the candidate scale.
Eigen::VectorXd descend_max_ratio(const Eigen::MatrixXd& basis,
                                  const Eigen::VectorXd& start_y, const GridD& grid,
                                  double L_K, MarginalEvaluator& eval,
                                  int max_iters, std::int64_t budget_left) {
    const int d = static_cast<int>(basis.cols());
    const double root_n = std::sqrt(static_cast<double>(grid.n));
    Eigen::VectorXd z = basis.transpose() * start_y;
    z.normalize();
    auto scaled = [&](const Eigen::VectorXd& zz) {
        Eigen::VectorXd y = basis * zz;
        return Eigen::VectorXd(root_n * y / y.norm());
    };
    auto objective = [&](const Eigen::VectorXd& zz) {
        const auto ests = eval.eval_multi(scaled(zz), grid.exponents);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.exponents.size(); ++i) {
            const double p = grid.exponents[i];
            worst = std::max(worst, ests[i].value /
                                        (std::sqrt(grid.n * p) * L_K));
        }
        return worst;
    };
    double best = objective(z);
    double step = 0.5;
    const std::int64_t calls0 = eval.calls();
    for (int it = 0; it < max_iters; ++it) {
        if (eval.calls() - calls0 > budget_left) break;
        const int i = it % d;
        bool improved = false;
        for (double sign : {1.0, -1.0}) {
            Eigen::VectorXd trial = z;
            trial[i] += sign * step;
            trial.normalize();
            const double val = objective(trial);
            if (val < best) {
                best = val;
                z = trial;
                improved = true;
                break;
            }
        }
        if (!improved && i == d - 1) step *= 0.5;
        if (step < 1e-4) break;
    }
    return scaled(z);
}

}  // namespace

FindResult find_directions(MarginalEvaluator& eval, const GridD& grid, double L_K,
                           const Eigen::MatrixXd& original_frame,
                           const FindOptions& opts) {
    const int n = eval.dim();
    if (grid.n != n) throw DimensionMismatch("find_directions: grid/evaluator n");
    if (!(opts.beta > 0.0) || opts.beta > 1.0)
        throw InvalidParam("find_directions: beta must be in (0,1]");
    const Eigen::MatrixXd& T = original_frame;
    if (T.rows() != n || T.cols() != n)
        throw DimensionMismatch("find_directions: original_frame shape");
    for (double p : grid.exponents)
        if (p > eval.max_p())
            throw PTooLargeForBudget(
                "find_directions: grid order exceeds the evaluator's p_max");

    const int m = static_cast<int>(std::ceil(opts.beta * n));
    FindResult result;
    DirectionSet& set = result.set;
    set.grid = grid;
    set.target_m = m;
    set.L_K = L_K;
    set.thetas.resize(0, n);

    const Eigen::MatrixXd TT = T.transpose() * T;
    std::vector<Eigen::VectorXd> constraints;  // T^T T v_i
    const double root_n = std::sqrt(static_cast<double>(n));
    const std::int64_t calls_start = eval.calls();
    const std::int64_t per_step_stall = std::max<std::int64_t>(
        16, opts.budget / (std::max(1, m) * 2 *
                           static_cast<std::int64_t>(grid.exponents.size())));

    for (int j = 0; j < m; ++j) {
        const Subspace F = orth_complement(constraints, n);
        const int d = F.dim();
        bool accepted = false;
        Eigen::VectorXd best_reject;
        double best_reject_ratio = std::numeric_limits<double>::infinity();
        bool fallback_done = false;

        for (std::uint64_t k = 0; !accepted; ++k) {
            if (eval.calls() - calls_start >= opts.budget) {
                set.stats.evaluator_calls = eval.calls() - calls_start;
                result.status = FindStatus::BudgetExhausted;
                return result;
            }
            Eigen::VectorXd y;
            bool from_fallback = false;
            if (!fallback_done && static_cast<std::int64_t>(k) >= per_step_stall) {
                // rejection stalled: one optimization pass from the best
                // rejected candidate, then keep sampling if it fails
                ++set.stats.fallback_runs;
                fallback_done = true;
                from_fallback = true;
                const Eigen::VectorXd start =
                    best_reject.size() ? best_reject
                                       : Eigen::VectorXd(root_n * F.basis.col(0));
                y = descend_max_ratio(
                    F.basis, start, grid, L_K, eval, opts.fallback_max_iters,
                    opts.budget - (eval.calls() - calls_start));
            } else {
                CounterRng rng(opts.seed,
                               stream::id(stream::kFind,
                                          (static_cast<std::uint64_t>(j) << 40) | k));
                Eigen::VectorXd z = rng.normal_vector(d);
                y = F.basis * z;
                y *= root_n / y.norm();
            }

            ++set.stats.candidates_tested;
            CandidateTest t = test_candidate(y, grid, L_K, eval);
            if (t.verdict == Verdict::Indeterminate) {
                if (eval.grow()) {
                    ++set.stats.budget_doublings;
                    t = test_candidate(y, grid, L_K, eval);
                }
                if (t.verdict == Verdict::Indeterminate) {
                    ++set.stats.indeterminate_rejects;
                    t.verdict = Verdict::Reject;
                }
            }
            if (t.verdict == Verdict::Accept) {
                accepted = true;
                if (from_fallback) ++set.stats.fallback_accepts;
                Eigen::VectorXd v = y / y.norm();
                constraints.push_back(TT * v);

                Eigen::VectorXd a = T * v;
                Eigen::VectorXd theta = a / a.norm();
                set.thetas.conservativeResize(set.thetas.rows() + 1, n);
                set.thetas.row(set.thetas.rows() - 1) = theta.transpose();

                MomentProfile prof;
                prof.theta = v;
                prof.n = n;
                prof.L_K = L_K;
                for (std::size_t i = 0; i < grid.exponents.size(); ++i) {
                    const Estimate& e = t.estimates[i];
                    prof.entries.push_back({grid.exponents[i], e.value / root_n,
                                            e.lo / root_n, e.hi / root_n,
                                            e.method});
                }
                set.profiles.push_back(std::move(prof));
                set.flags.push_back(-1);
            } else {
                if (t.rejected_by_A) ++set.stats.rejected_A;
                if (t.rejected_by_B) ++set.stats.rejected_B;
                if (t.rejected_by_A && t.max_A_ratio < best_reject_ratio) {
                    best_reject_ratio = t.max_A_ratio;
                    best_reject = y;
                }
            }
        }
    }
    set.stats.evaluator_calls = eval.calls() - calls_start;
    return result;
}

CertifyReport certify(const MarginalEvaluator& eval, const BodySpec* body,
                      DirectionSet& set, bool full_grid_up_to_n, double c1,
                      double C1) {
    const int n = eval.dim();
    CertifyReport report;
    report.c1 = c1;
    report.C1 = C1;
    report.empirical_c = std::numeric_limits<double>::infinity();
    report.empirical_C = 0.0;

    double limit = static_cast<double>(n);
    if (!full_grid_up_to_n) limit = set.grid.max_p();
    if (limit > eval.max_p()) {
        limit = eval.max_p();
        report.truncated = true;
    }
    std::vector<double> grid = half_dyadic_grid(limit);
    if (full_grid_up_to_n && !report.truncated &&
        grid.back() < static_cast<double>(n))
        grid.push_back(static_cast<double>(n));
    report.grid_max = grid.back();

    set.flags.assign(set.count(), -1);
    bool all_pass = true;
    for (int i = 0; i < set.count(); ++i) {
        const Eigen::VectorXd theta = set.thetas.row(i).transpose();
        ThetaCertification cert;
        cert.profile = make_profile(eval, theta, grid, set.L_K);

        double v2 = 0.0;
        for (const auto& e : cert.profile.entries)
            if (std::abs(e.p - 2.0) < 1e-9) v2 = e.value;
        cert.sup_ratio = 0.0;
        cert.inf_ratio = std::numeric_limits<double>::infinity();
        for (const auto& e : cert.profile.entries) {
            const double ratio = e.value / (std::sqrt(e.p) * v2);
            if (ratio > cert.sup_ratio) {
                cert.sup_ratio = ratio;
                cert.sup_at = e.p;
            }
            if (ratio < cert.inf_ratio) {
                cert.inf_ratio = ratio;
                cert.inf_at = e.p;
            }
        }
        cert.bounds_pass = cert.sup_ratio <= C1 && cert.inf_ratio >= c1;

        if (body != nullptr) {
            auto R = body->support_radius(theta);
            auto norm_n = endpoint_norm(*body, theta);
            if (!norm_n) {
                auto md = body->marginal(theta);
                if (md) {
                    Estimate e = marginal_lp_quad(*md, static_cast<double>(n));
                    norm_n = e.value;
                }
            }
            if (R && norm_n) {
                cert.endpoint_checked = true;
                cert.support_radius = *R;
                cert.norm_at_n = *norm_n;
                cert.endpoint_pass = *R <= 8.0 * (*norm_n);
            }
        }
        cert.pass = cert.bounds_pass && cert.endpoint_pass;
        set.flags[i] = cert.pass ? 1 : 0;
        report.empirical_c = std::min(report.empirical_c, cert.inf_ratio);
        report.empirical_C = std::max(report.empirical_C, cert.sup_ratio);
        all_pass = all_pass && cert.pass;
        report.per_theta.push_back(std::move(cert));
    }
    report.all_pass = all_pass && set.count() >= set.target_m;
    return report;
}

nlohmann::json DirectionSet::to_json() const {
    nlohmann::json thetas_json = nlohmann::json::array();
    for (int i = 0; i < count(); ++i) {
        std::vector<double> row(thetas.cols());
        for (int j = 0; j < thetas.cols(); ++j) row[j] = thetas(i, j);
        thetas_json.push_back(row);
    }
    nlohmann::json profiles_json = nlohmann::json::array();
    for (const auto& prof : profiles) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : prof.entries)
            entries.push_back({{"p", e.p},
                               {"value", e.value},
                               {"ci_low", e.lo},
                               {"ci_high", e.hi},
                               {"method", e.method == EstimateMethod::MonteCarlo
                                              ? "mc"
                                              : "quad"}});
        profiles_json.push_back(entries);
    }
    return {{"constants", grid.to_json()},
            {"target_m", target_m},
            {"count", count()},
            {"L_K", L_K},
            {"thetas", thetas_json},
            {"profiles", profiles_json},
            {"flags", flags},
            {"stats",
             {{"candidates_tested", stats.candidates_tested},
              {"rejected_A", stats.rejected_A},
              {"rejected_B", stats.rejected_B},
              {"indeterminate_rejects", stats.indeterminate_rejects},
              {"budget_doublings", stats.budget_doublings},
              {"fallback_runs", stats.fallback_runs},
              {"fallback_accepts", stats.fallback_accepts},
              {"evaluator_calls", stats.evaluator_calls}}}};
}

nlohmann::json CertifyReport::to_json() const {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& c : per_theta) {
        per.push_back({{"sup_ratio", c.sup_ratio},
                       {"sup_at", c.sup_at},
                       {"inf_ratio", c.inf_ratio},
                       {"inf_at", c.inf_at},
                       {"bounds_pass", c.bounds_pass},
                       {"endpoint_checked", c.endpoint_checked},
                       {"endpoint_pass", c.endpoint_pass},
                       {"support_radius", c.support_radius},
                       {"norm_at_n", c.norm_at_n},
                       {"pass", c.pass}});
    }
    return {{"c1", c1},
            {"C1", C1},
            {"empirical_c", empirical_c},
            {"empirical_C", empirical_C},
            {"grid_max", grid_max},
            {"truncated", truncated},
            {"all_pass", all_pass},
            {"per_theta", per}};
}

}  // namespace subgauss
