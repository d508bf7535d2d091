#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace subgauss {

enum class BodyKind { Cube, EuclideanBall, LpBall, Simplex, Cone, OraclePolytope };
enum class DensityForm { ClosedForm, NumericalProjection };

/// Halfspace {x : <normal,x> <= offset}.
struct Halfspace {
    Eigen::VectorXd normal;
    double offset = 0.0;
};

/// One-dimensional marginal law of <X,theta>, given through its log-pdf on
/// a finite support interval. Quadrature consumers work in log space so
/// that moments of order up to the ambient dimension stay representable.
struct MarginalDensity {
    Eigen::VectorXd direction;
    double lo = 0.0;
    double hi = 0.0;
    std::function<double(double)> log_pdf;
    DensityForm form = DensityForm::ClosedForm;
    double bandwidth = 0.0;  // NumericalProjection only

    double pdf(double t) const;
};

struct Chord {
    double lo = 0.0;
    double hi = 0.0;
};

// Declarative description of a centered, volume-one convex body. Immutable
// after construction; all queries are pure, so instances can be shared
// freely across worker threads.
class BodySpec {
public:
    static BodySpec cube(int n);
    /// Volume-one ball by default; pass an explicit radius for a dilate.
    static BodySpec euclidean_ball(int n, double radius = -1.0);
    static BodySpec lp_ball(int n, double p);
    static BodySpec simplex(int n);
    /// Cone over a centered volume-one base body living in dimension n-1.
    /// With height == n the cone itself has volume one; other heights get a
    /// uniform rescale so normalization still holds.
    static BodySpec cone(BodySpec base, double height);
    static BodySpec cone_over_cube(int n);  // height n, no rescale
    /// Polytope given by halfspaces with a declared bounding radius. The
    /// centroid and volume needed for normalization are Monte Carlo
    /// estimates over the bounding box with the given budget.
    static BodySpec oracle_polytope(std::vector<Halfspace> halfspaces,
                                    double bounding_radius, std::int64_t mc_budget,
                                    std::uint64_t seed);

    BodyKind kind() const { return kind_; }
    int dim() const { return n_; }
    std::string name() const;

    bool contains(const Eigen::VectorXd& x) const;
    /// Support function h_K(dir) = sup over K of <x,dir>; nullopt when the
    /// body has no closed form (OraclePolytope).
    std::optional<double> support(const Eigen::VectorXd& dir) const;
    /// max |<x,dir>| over K.
    std::optional<double> support_radius(const Eigen::VectorXd& dir) const;

    /// Closed-form marginal along dir if one exists (coordinate directions
    /// of product-structured kinds, any direction of the ball, the cone
    /// axis and cube-base coordinates). Direction need not be normalized.
    std::optional<MarginalDensity> marginal(const Eigen::VectorXd& dir) const;

    /// Chord of the line x + t*u through the body; closed form for
    /// halfspace kinds and the ball, bisection to 1e-12 otherwise.
    Chord chord(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

    std::optional<std::vector<Halfspace>> halfspaces() const;

    bool has_direct_sampler() const;

    // Kind-specific accessors (throw Unsupported when not applicable).
    double radius() const;       // EuclideanBall / LpBall scale
    double lp_exponent() const;  // LpBall
    double simplex_scale() const;
    const BodySpec& cone_base() const;
    double cone_height() const;       // pre-scale height parameter
    double cone_scale() const;        // uniform rescale applied to the cone
    double cone_axis_shift() const;   // centering shift along the axis
    double bounding_radius() const;   // OraclePolytope search box

    /// Translation that was applied to center the body (original frame).
    const Eigen::VectorXd& center_shift() const { return center_shift_; }

    nlohmann::json to_json() const;
    static BodySpec from_json(const nlohmann::json& j);

private:
    BodySpec() = default;

    BodyKind kind_ = BodyKind::Cube;
    int n_ = 0;
    double radius_ = 0.0;       // ball/lpball
    double lp_p_ = 2.0;         // lpball
    double scale_ = 1.0;        // simplex scale / cone rescale
    double height_ = 0.0;       // cone height parameter
    Eigen::VectorXd center_shift_;
    std::shared_ptr<const BodySpec> base_;               // cone
    std::shared_ptr<const std::vector<Halfspace>> hs_;   // oracle polytope (centered frame)
    double bound_radius_ = 0.0;                          // oracle polytope
    nlohmann::json polytope_meta_;                       // normalization diagnostics

    void check_dim(const Eigen::VectorXd& x) const;
    Chord chord_bisect(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
};

/// Marginal density of the standard normal law (not a body; reference
/// law for Gaussian-source comparisons).
MarginalDensity gaussian_marginal();

/// Density of the shifted exponential E-1 (mean zero, variance one).
MarginalDensity shifted_exponential_density();

}  // namespace subgauss
