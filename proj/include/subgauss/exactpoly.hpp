#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "subgauss/bodies.hpp"

namespace subgauss {

// Exact polynomial moments of linear marginals over polytopal bodies.
// For even m, E<X,theta>^m equals E|<X,theta>|^m, which is what the
// endpoint comparison R <= 8 ||X_theta||_n needs at generic directions
// where no closed-form density exists.

/// E <X,a>^m for X uniform on [-1/2,1/2]^n; independent-coordinate series
/// convolution, any m >= 0.
double cube_moment(const Eigen::VectorXd& a, int m);

/// Mean of <x,theta>^m over a d-simplex with vertex projections t_0..t_d:
/// m! d! / (m+d)! times the complete homogeneous symmetric polynomial h_m.
double simplex_mean_power(const std::vector<double>& t, int m);

/// E|<X,theta>|^p over the volume-one ball via the exact Beta-ratio radial
/// formula; any real p >= 0.
double ball_abs_moment(int n, double radius, double p);

/// E <X,theta>^m over a catalog body, exact. Supported: Cube (any n),
/// Simplex, LpBall with p == 1 (2^n orthant simplices, n <= 20), Cone over
/// a cube base ((n-1)! simplices, n <= 11), EuclideanBall (even m).
/// Returns nullopt for unsupported kinds/sizes.
std::optional<double> body_moment(const BodySpec& body,
                                  const Eigen::VectorXd& theta, int m);

/// ||<X,theta>||_n = (E|<X,theta>|^n)^{1/n} when n is even and the body is
/// supported above (or any n for the ball); the endpoint-check norm.
std::optional<double> endpoint_norm(const BodySpec& body,
                                    const Eigen::VectorXd& theta);

}  // namespace subgauss
