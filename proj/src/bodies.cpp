#include "subgauss/bodies.hpp"

#include <cmath>
#include <limits>

#include "subgauss/errors.hpp"
#include "subgauss/rng.hpp"

namespace subgauss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_ball_volume(int n, double p) {
    // log volume of the unit l_p ball in R^n
    return n * (std::log(2.0) + std::lgamma(1.0 + 1.0 / p)) -
           std::lgamma(1.0 + static_cast<double>(n) / p);
}

bool is_signed_coordinate(const Eigen::VectorXd& u, int* index, double* sign) {
    int idx = -1;
    for (int i = 0; i < u.size(); ++i) {
        if (std::abs(u[i]) > 1e-10) {
            if (idx >= 0) return false;
            idx = i;
        }
    }
    if (idx < 0) return false;
    if (std::abs(std::abs(u[idx]) - 1.0) > 1e-10) return false;
    *index = idx;
    *sign = u[idx] > 0 ? 1.0 : -1.0;
    return true;
}

}  // namespace

double MarginalDensity::pdf(double t) const {
    if (t < lo || t > hi) return 0.0;
    const double g = log_pdf(t);
    return std::isfinite(g) ? std::exp(g) : 0.0;
}

void BodySpec::check_dim(const Eigen::VectorXd& x) const {
    if (x.size() != n_)
        throw DimensionMismatch("body expects dimension " + std::to_string(n_) +
                                ", got " + std::to_string(x.size()));
}

BodySpec BodySpec::cube(int n) {
    if (n < 1) throw InvalidParam("cube: n must be >= 1");
    BodySpec b;
    b.kind_ = BodyKind::Cube;
    b.n_ = n;
    b.center_shift_ = Eigen::VectorXd::Zero(n);
    return b;
}

BodySpec BodySpec::euclidean_ball(int n, double radius) {
    if (n < 1) throw InvalidParam("ball: n must be >= 1");
    BodySpec b;
    b.kind_ = BodyKind::EuclideanBall;
    b.n_ = n;
    if (radius > 0) {
        b.radius_ = radius;
    } else if (radius == -1.0) {
        b.radius_ = std::exp(-log_ball_volume(n, 2.0) / n);
    } else {
        throw InvalidParam("ball: radius must be positive");
    }
    b.center_shift_ = Eigen::VectorXd::Zero(n);
    return b;
}

BodySpec BodySpec::lp_ball(int n, double p) {
    if (n < 1) throw InvalidParam("lp_ball: n must be >= 1");
    if (!(p >= 1.0)) throw InvalidParam("lp_ball: p must be >= 1");
    BodySpec b;
    b.kind_ = BodyKind::LpBall;
    b.n_ = n;
    b.lp_p_ = p;
    b.radius_ = std::exp(-log_ball_volume(n, p) / n);
    b.center_shift_ = Eigen::VectorXd::Zero(n);
    return b;
}

BodySpec BodySpec::simplex(int n) {
    if (n < 1) throw InvalidParam("simplex: n must be >= 1");
    BodySpec b;
    b.kind_ = BodyKind::Simplex;
    b.n_ = n;
    b.scale_ = std::exp(std::lgamma(n + 1.0) / n);  // (n!)^{1/n}
    b.center_shift_ =
        Eigen::VectorXd::Constant(n, b.scale_ / (n + 1.0));
    return b;
}

BodySpec BodySpec::cone(BodySpec base, double height) {
    if (height <= 0.0) throw InvalidParam("cone: height must be positive");
    BodySpec b;
    b.kind_ = BodyKind::Cone;
    b.n_ = base.dim() + 1;
    b.height_ = height;
    // |cone| = height/n for a volume-one base; rescale to volume one.
    b.scale_ = std::pow(static_cast<double>(b.n_) / height, 1.0 / b.n_);
    b.base_ = std::make_shared<const BodySpec>(std::move(base));
    b.center_shift_ = Eigen::VectorXd::Zero(b.n_);
    b.center_shift_[b.n_ - 1] = b.scale_ * height / (b.n_ + 1.0);
    return b;
}

BodySpec BodySpec::cone_over_cube(int n) {
    if (n < 2) throw InvalidParam("cone_over_cube: n must be >= 2");
    return cone(cube(n - 1), static_cast<double>(n));
}

BodySpec BodySpec::oracle_polytope(std::vector<Halfspace> halfspaces,
                                   double bounding_radius, std::int64_t mc_budget,
                                   std::uint64_t seed) {
    if (halfspaces.empty()) throw InvalidParam("polytope: no halfspaces");
    if (bounding_radius <= 0) throw InvalidParam("polytope: bad bounding radius");
    if (mc_budget < 1000) throw InvalidParam("polytope: mc budget too small");
    const int n = static_cast<int>(halfspaces.front().normal.size());
    for (const auto& h : halfspaces)
        if (h.normal.size() != n) throw DimensionMismatch("polytope: mixed dims");

    auto raw_contains = [&](const Eigen::VectorXd& x) {
        for (const auto& h : halfspaces)
            if (h.normal.dot(x) > h.offset) return false;
        return true;
    };

    // Centroid and volume over the declared box; fixed split into two
    // passes so centering happens before the volume scale is read off.
    CounterRng rng(seed, stream::id(stream::kSampler, 0));
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < mc_budget; ++i) {
        Eigen::VectorXd x(n);
        for (int k = 0; k < n; ++k)
            x[k] = rng.uniform(-bounding_radius, bounding_radius);
        if (raw_contains(x)) {
            centroid += x;
            ++hits;
        }
    }
    if (hits == 0) throw InvalidParam("polytope: empty within bounding box");
    centroid /= static_cast<double>(hits);
    const double box_vol = n * std::log(2.0 * bounding_radius);
    const double log_volume =
        box_vol + std::log(static_cast<double>(hits) / mc_budget);
    const double lambda = std::exp(-log_volume / n);  // scale to volume one

    BodySpec b;
    b.kind_ = BodyKind::OraclePolytope;
    b.n_ = n;
    b.center_shift_ = centroid;
    b.bound_radius_ = lambda * (bounding_radius * std::sqrt(static_cast<double>(n)) +
                                centroid.norm());
    auto hs = std::make_shared<std::vector<Halfspace>>();
    hs->reserve(halfspaces.size());
    for (const auto& h : halfspaces) {
        // x in K' <=> x/lambda + centroid in K
        hs->push_back({h.normal, lambda * (h.offset - h.normal.dot(centroid))});
    }
    b.hs_ = hs;
    b.polytope_meta_ = {{"volume_estimate", std::exp(log_volume)},
                        {"mc_budget", mc_budget},
                        {"hits", hits},
                        {"seed", seed}};
    return b;
}

std::string BodySpec::name() const {
    switch (kind_) {
        case BodyKind::Cube: return "cube";
        case BodyKind::EuclideanBall: return "ball";
        case BodyKind::LpBall: return "lpball(" + std::to_string(lp_p_) + ")";
        case BodyKind::Simplex: return "simplex";
        case BodyKind::Cone: return "cone[" + base_->name() + "]";
        case BodyKind::OraclePolytope: return "polytope";
    }
    return "?";
}

bool BodySpec::contains(const Eigen::VectorXd& x) const {
    check_dim(x);
    switch (kind_) {
        case BodyKind::Cube:
            return x.lpNorm<Eigen::Infinity>() <= 0.5;
        case BodyKind::EuclideanBall:
            return x.norm() <= radius_;
        case BodyKind::LpBall: {
            double s = 0.0;
            for (int i = 0; i < n_; ++i) s += std::pow(std::abs(x[i]), lp_p_);
            return s <= std::pow(radius_, lp_p_);
        }
        case BodyKind::Simplex: {
            const double a = scale_ / (n_ + 1.0);
            double sum = 0.0;
            for (int i = 0; i < n_; ++i) {
                if (x[i] < -a) return false;
                sum += x[i] + a;
            }
            return sum <= scale_;
        }
        case BodyKind::Cone: {
            const double s = (x[n_ - 1] + center_shift_[n_ - 1]) / scale_;
            if (s < 0.0 || s > height_) return false;
            const double w = 1.0 - s / height_;
            Eigen::VectorXd xb = x.head(n_ - 1);
            if (w <= 0.0) return xb.lpNorm<Eigen::Infinity>() == 0.0;
            return base_->contains(xb / (scale_ * w));
        }
        case BodyKind::OraclePolytope: {
            for (const auto& h : *hs_)
                if (h.normal.dot(x) > h.offset) return false;
            return true;
        }
    }
    return false;
}

std::optional<double> BodySpec::support(const Eigen::VectorXd& dir) const {
    check_dim(dir);
    switch (kind_) {
        case BodyKind::Cube:
            return 0.5 * dir.lpNorm<1>();
        case BodyKind::EuclideanBall:
            return radius_ * dir.norm();
        case BodyKind::LpBall: {
            if (lp_p_ == 1.0) return radius_ * dir.lpNorm<Eigen::Infinity>();
            const double q = lp_p_ / (lp_p_ - 1.0);
            double s = 0.0;
            for (int i = 0; i < n_; ++i) s += std::pow(std::abs(dir[i]), q);
            return radius_ * std::pow(s, 1.0 / q);
        }
        case BodyKind::Simplex: {
            const double m = std::max(0.0, dir.maxCoeff());
            return scale_ * m - (scale_ / (n_ + 1.0)) * dir.sum();
        }
        case BodyKind::Cone: {
            auto hb = base_->support(dir.head(n_ - 1));
            if (!hb) return std::nullopt;
            const double huncentered =
                scale_ * std::max(*hb, height_ * dir[n_ - 1]);
            return huncentered - center_shift_[n_ - 1] * dir[n_ - 1];
        }
        case BodyKind::OraclePolytope:
            return std::nullopt;
    }
    return std::nullopt;
}

std::optional<double> BodySpec::support_radius(const Eigen::VectorXd& dir) const {
    auto a = support(dir);
    auto b = support(-dir);
    if (!a || !b) return std::nullopt;
    return std::max(*a, *b);
}

std::optional<MarginalDensity> BodySpec::marginal(const Eigen::VectorXd& dir) const {
    check_dim(dir);
    const double norm = dir.norm();
    if (norm < 1e-14) throw InvalidParam("marginal: zero direction");
    Eigen::VectorXd u = dir / norm;

    MarginalDensity md;
    md.direction = u;
    md.form = DensityForm::ClosedForm;

    const int n = n_;
    int idx = -1;
    double sign = 0.0;
    const bool coord = is_signed_coordinate(u, &idx, &sign);

    switch (kind_) {
        case BodyKind::Cube: {
            if (!coord) return std::nullopt;
            md.lo = -0.5;
            md.hi = 0.5;
            md.log_pdf = [](double) { return 0.0; };
            return md;
        }
        case BodyKind::EuclideanBall: {
            const double r = radius_;
            md.lo = -r;
            md.hi = r;
            if (n == 1) {
                md.log_pdf = [r](double t) {
                    return std::abs(t) <= r ? -std::log(2.0 * r) : -kInf;
                };
                return md;
            }
            const double logc = 0.5 * (n - 1) * std::log(M_PI) -
                                std::lgamma(0.5 * (n + 1));
            md.log_pdf = [r, n, logc](double t) {
                const double d = (r - t) * (r + t);
                if (d <= 0.0) return -kInf;
                return logc + 0.5 * (n - 1) * std::log(d);
            };
            return md;
        }
        case BodyKind::LpBall: {
            if (!coord) return std::nullopt;
            const double r = radius_;
            const double p = lp_p_;
            md.lo = -r;
            md.hi = r;
            if (n == 1) {
                md.log_pdf = [r](double t) {
                    return std::abs(t) <= r ? -std::log(2.0 * r) : -kInf;
                };
                return md;
            }
            const double logv = log_ball_volume(n - 1, p);
            const double rp = std::pow(r, p);
            md.log_pdf = [logv, rp, p, n](double t) {
                const double d = rp - std::pow(std::abs(t), p);
                if (d <= 0.0) return -kInf;
                return logv + ((n - 1) / p) * std::log(d);
            };
            return md;
        }
        case BodyKind::Simplex: {
            if (!coord) return std::nullopt;
            const double s = scale_;
            const double a = s / (n + 1.0);
            // density of sign*x_idx; by symmetry of the marginal formula in
            // the coordinate, only the sign flip matters.
            md.lo = sign > 0 ? -a : a - s;
            md.hi = sign > 0 ? s - a : a;
            md.log_pdf = [s, a, n, sign](double t) {
                const double v = sign * t + a;  // in [0, s]
                if (v < 0.0 || v > s) return -kInf;
                const double w = 1.0 - v / s;
                if (w <= 0.0) return -kInf;
                return std::log(static_cast<double>(n) / s) + (n - 1) * std::log(w);
            };
            return md;
        }
        case BodyKind::Cone: {
            if (!coord) return std::nullopt;
            if (idx == n - 1) {  // axis
                const double H = scale_ * height_;
                const double b = center_shift_[n - 1];
                md.lo = sign > 0 ? -b : b - H;
                md.hi = sign > 0 ? H - b : b;
                md.log_pdf = [H, b, n, sign](double t) {
                    const double v = sign * t + b;
                    if (v < 0.0 || v > H) return -kInf;
                    const double w = 1.0 - v / H;
                    if (w <= 0.0) return -kInf;
                    return std::log(n / H) + (n - 1) * std::log(w);
                };
                return md;
            }
            if (base_->kind() != BodyKind::Cube) return std::nullopt;
            const double lam = scale_;
            md.lo = -0.5 * lam;
            md.hi = 0.5 * lam;
            md.log_pdf = [lam, n](double t) {
                const double z = 2.0 * std::abs(t) / lam;
                if (z >= 1.0) return -kInf;
                const double body = 1.0 - std::pow(z, n - 1);
                return std::log(static_cast<double>(n) / (lam * (n - 1))) +
                       std::log(body);
            };
            return md;
        }
        case BodyKind::OraclePolytope:
            return std::nullopt;
    }
    return std::nullopt;
}

std::optional<std::vector<Halfspace>> BodySpec::halfspaces() const {
    switch (kind_) {
        case BodyKind::Cube: {
            std::vector<Halfspace> hs;
            for (int i = 0; i < n_; ++i) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(n_);
                e[i] = 1.0;
                hs.push_back({e, 0.5});
                hs.push_back({-e, 0.5});
            }
            return hs;
        }
        case BodyKind::Simplex: {
            std::vector<Halfspace> hs;
            const double a = scale_ / (n_ + 1.0);
            for (int i = 0; i < n_; ++i) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(n_);
                e[i] = -1.0;
                hs.push_back({e, a});
            }
            hs.push_back({Eigen::VectorXd::Ones(n_), scale_ / (n_ + 1.0)});
            return hs;
        }
        case BodyKind::Cone: {
            auto base_hs = base_->halfspaces();
            if (!base_hs) return std::nullopt;
            std::vector<Halfspace> hs;
            const double shift = center_shift_[n_ - 1];
            const double lam = scale_;
            const double h = height_;
            for (const auto& bh : *base_hs) {
                Eigen::VectorXd nrm(n_);
                nrm.head(n_ - 1) = bh.normal;
                nrm[n_ - 1] = bh.offset / h;
                hs.push_back({nrm, bh.offset * (lam - shift / h)});
            }
            // 0 <= s' <= h in the centered frame
            Eigen::VectorXd axis = Eigen::VectorXd::Zero(n_);
            axis[n_ - 1] = -1.0;
            hs.push_back({axis, shift});
            axis[n_ - 1] = 1.0;
            hs.push_back({axis, lam * h - shift});
            return hs;
        }
        case BodyKind::OraclePolytope:
            return *hs_;
        default:
            return std::nullopt;
    }
}

Chord BodySpec::chord_bisect(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    // Bracket then bisect against contains(); tolerance 1e-12.
    auto boundary = [&](double dir_sign) {
        double inside = 0.0;
        double step = 1.0;
        double outside;
        for (;;) {
            outside = inside + dir_sign * step;
            if (!contains(x + outside * u)) break;
            inside = outside;
            step *= 2.0;
            if (step > 1e9) throw Unsupported("chord: unbounded direction");
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (inside + outside);
            if (contains(x + mid * u))
                inside = mid;
            else
                outside = mid;
            if (std::abs(outside - inside) < 1e-12) break;
        }
        return inside;
    };
    return {boundary(-1.0), boundary(1.0)};
}

Chord BodySpec::chord(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    check_dim(x);
    check_dim(u);
    switch (kind_) {
        case BodyKind::EuclideanBall: {
            const double uu = u.squaredNorm();
            const double xu = x.dot(u);
            const double disc = xu * xu - uu * (x.squaredNorm() - radius_ * radius_);
            if (disc <= 0.0) return {0.0, 0.0};
            const double s = std::sqrt(disc);
            return {(-xu - s) / uu, (-xu + s) / uu};
        }
        case BodyKind::Cube:
        case BodyKind::Simplex:
        case BodyKind::OraclePolytope:
        case BodyKind::Cone: {
            auto hs = halfspaces();
            if (!hs) return chord_bisect(x, u);
            double lo = -kInf, hi = kInf;
            for (const auto& h : *hs) {
                const double au = h.normal.dot(u);
                const double slack = h.offset - h.normal.dot(x);
                if (std::abs(au) < 1e-14) {
                    if (slack < 0) return {0.0, 0.0};
                    continue;
                }
                const double t = slack / au;
                if (au > 0)
                    hi = std::min(hi, t);
                else
                    lo = std::max(lo, t);
            }
            if (!(lo <= hi)) return {0.0, 0.0};
            return {lo, hi};
        }
        case BodyKind::LpBall:
            return chord_bisect(x, u);
    }
    return {0.0, 0.0};
}

bool BodySpec::has_direct_sampler() const {
    switch (kind_) {
        case BodyKind::Cube:
        case BodyKind::EuclideanBall:
        case BodyKind::LpBall:
        case BodyKind::Simplex:
            return true;
        case BodyKind::Cone:
            return base_->has_direct_sampler();
        case BodyKind::OraclePolytope:
            return false;
    }
    return false;
}

double BodySpec::radius() const {
    if (kind_ != BodyKind::EuclideanBall && kind_ != BodyKind::LpBall)
        throw Unsupported("radius: not a ball");
    return radius_;
}

double BodySpec::lp_exponent() const {
    if (kind_ != BodyKind::LpBall) throw Unsupported("lp_exponent: not an lp ball");
    return lp_p_;
}

double BodySpec::simplex_scale() const {
    if (kind_ != BodyKind::Simplex) throw Unsupported("simplex_scale: not a simplex");
    return scale_;
}

const BodySpec& BodySpec::cone_base() const {
    if (kind_ != BodyKind::Cone) throw Unsupported("cone_base: not a cone");
    return *base_;
}

double BodySpec::cone_height() const {
    if (kind_ != BodyKind::Cone) throw Unsupported("cone_height: not a cone");
    return height_;
}

double BodySpec::cone_scale() const {
    if (kind_ != BodyKind::Cone) throw Unsupported("cone_scale: not a cone");
    return scale_;
}

double BodySpec::cone_axis_shift() const {
    if (kind_ != BodyKind::Cone) throw Unsupported("cone_axis_shift: not a cone");
    return center_shift_[n_ - 1];
}

double BodySpec::bounding_radius() const {
    if (kind_ != BodyKind::OraclePolytope)
        throw Unsupported("bounding_radius: not an oracle polytope");
    return bound_radius_;
}

nlohmann::json BodySpec::to_json() const {
    nlohmann::json j;
    j["n"] = n_;
    switch (kind_) {
        case BodyKind::Cube:
            j["kind"] = "cube";
            j["params"] = nlohmann::json::object();
            break;
        case BodyKind::EuclideanBall:
            j["kind"] = "ball";
            j["params"] = {{"radius", radius_}};
            break;
        case BodyKind::LpBall:
            j["kind"] = "lpball";
            j["params"] = {{"p", lp_p_}};
            break;
        case BodyKind::Simplex:
            j["kind"] = "simplex";
            j["params"] = nlohmann::json::object();
            break;
        case BodyKind::Cone:
            j["kind"] = "cone";
            j["params"] = {{"height", height_}, {"base", base_->to_json()}};
            break;
        case BodyKind::OraclePolytope: {
            j["kind"] = "polytope";
            nlohmann::json hs = nlohmann::json::array();
            for (const auto& h : *hs_) {
                std::vector<double> nv(h.normal.data(), h.normal.data() + n_);
                hs.push_back({{"normal", nv}, {"offset", h.offset}});
            }
            j["params"] = {{"halfspaces", hs},
                           {"bound", bound_radius_},
                           {"normalized", true},
                           {"meta", polytope_meta_}};
            break;
        }
    }
    return j;
}

BodySpec BodySpec::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int n = j.at("n").get<int>();
    const auto params = j.value("params", nlohmann::json::object());
    if (kind == "cube") return cube(n);
    if (kind == "ball") {
        if (params.contains("radius"))
            return euclidean_ball(n, params["radius"].get<double>());
        return euclidean_ball(n);
    }
    if (kind == "lpball") return lp_ball(n, params.at("p").get<double>());
    if (kind == "simplex") return simplex(n);
    if (kind == "cone") {
        const double h = params.value("height", static_cast<double>(n));
        if (params.contains("base")) return cone(from_json(params["base"]), h);
        return cone(cube(n - 1), h);
    }
    if (kind == "polytope") {
        std::vector<Halfspace> hs;
        for (const auto& hj : params.at("halfspaces")) {
            Halfspace h;
            const auto nv = hj.at("normal").get<std::vector<double>>();
            h.normal = Eigen::Map<const Eigen::VectorXd>(nv.data(), nv.size());
            h.offset = hj.at("offset").get<double>();
            hs.push_back(std::move(h));
        }
        if (params.value("normalized", false)) {
            // Re-ingest an already-normalized polytope verbatim.
            BodySpec b;
            b.kind_ = BodyKind::OraclePolytope;
            b.n_ = n;
            b.center_shift_ = Eigen::VectorXd::Zero(n);
            b.bound_radius_ = params.at("bound").get<double>();
            b.hs_ = std::make_shared<const std::vector<Halfspace>>(std::move(hs));
            return b;
        }
        return oracle_polytope(std::move(hs), params.at("bound").get<double>(),
                               params.value("mc_budget", std::int64_t{200000}),
                               params.value("seed", std::uint64_t{1}));
    }
    throw InvalidParam("unknown body kind: " + kind);
}

MarginalDensity gaussian_marginal() {
    MarginalDensity md;
    md.direction = Eigen::VectorXd::Ones(1);
    md.lo = -40.0;
    md.hi = 40.0;
    md.log_pdf = [](double t) { return -0.5 * t * t - 0.5 * std::log(2.0 * M_PI); };
    md.form = DensityForm::ClosedForm;
    return md;
}

MarginalDensity shifted_exponential_density() {
    MarginalDensity md;
    md.direction = Eigen::VectorXd::Ones(1);
    md.lo = -1.0;
    md.hi = 800.0;  // negligible mass beyond
    md.log_pdf = [](double t) { return t >= -1.0 ? -(t + 1.0) : -kInf; };
    md.form = DensityForm::ClosedForm;
    return md;
}

}  // namespace subgauss
