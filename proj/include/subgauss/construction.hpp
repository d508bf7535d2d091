#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "subgauss/bodies.hpp"
#include "subgauss/evaluator.hpp"
#include "subgauss/moments.hpp"

namespace subgauss {

/// Dyadic moment-order grid {2^j : 2^j <= c0 * n} with the constants in
/// force: C0 scales the outer sets A_p, eps the inner sets B_p.
struct GridD {
    int n = 0;
    double c0 = 0.25;
    double C0 = 4.0;
    double eps = 0.05;
    std::vector<double> exponents;

    static GridD make(int n, double c0 = 0.25, double C0 = 4.0, double eps = 0.05);
    double max_p() const { return exponents.back(); }
    nlohmann::json to_json() const;
};

enum class Membership { In, Out, Indeterminate };

// CI-aware comparisons against the A_p / B_p thresholds
// C0*sqrt(n p)*L_K and eps*sqrt(n p)*L_K.
Membership test_Ap(const Estimate& e, double p, const GridD& grid, double L_K);
Membership test_Bp(const Estimate& e, double p, const GridD& grid, double L_K);

// Boolean membership with the tie-break policy: an indeterminate estimate
// gets one evaluator budget doubling, then resolves conservatively
// (not-in-A / in-B), so uncertain candidates are rejected rather than
// accepted.
bool in_Ap(const Eigen::VectorXd& y, double p, const GridD& grid, double L_K,
           MarginalEvaluator& eval);
bool in_Bp(const Eigen::VectorXd& y, double p, const GridD& grid, double L_K,
           MarginalEvaluator& eval);

struct AcceptanceStats {
    std::int64_t candidates_tested = 0;
    std::int64_t rejected_A = 0;
    std::int64_t rejected_B = 0;
    std::int64_t indeterminate_rejects = 0;
    std::int64_t budget_doublings = 0;
    std::int64_t fallback_runs = 0;
    std::int64_t fallback_accepts = 0;
    std::int64_t evaluator_calls = 0;
};

struct DirectionSet {
    Eigen::MatrixXd thetas;  // rows: orthonormal directions, original frame
    std::vector<MomentProfile> profiles;  // isotropic-frame profiles over D
    std::vector<int> flags;               // certify(): 1 pass, 0 fail, -1 unset
    GridD grid;
    int target_m = 0;
    double L_K = 0.0;
    AcceptanceStats stats;

    int count() const { return static_cast<int>(thetas.rows()); }
    nlohmann::json to_json() const;
};

enum class FindStatus { Ok, BudgetExhausted };

struct FindOptions {
    double beta = 0.9;              // target |Theta| = ceil(beta*n)
    std::int64_t budget = 400000;   // total evaluator-call budget
    std::uint64_t seed = 1;
    int fallback_max_iters = 200;
};

struct FindResult {
    DirectionSet set;
    FindStatus status = FindStatus::Ok;
};

// Greedy orthonormal selection in the isotropic frame. Per step draws
// Gaussian candidates inside the current subspace, rescales them to
// |y| = sqrt(n), and accepts y when it lies in every A_p and escapes every
// B_p over the grid. When rejection stalls, a projected coordinate descent
// from the best rejected candidate minimizes max_p of the normalized
// p-norm ratio and the result is re-tested (labeled fallback). The map
// `original_frame` (the isotropic transform T) carries accepted unit
// vectors v back to theta = Tv/|Tv|; successive subspaces enforce
// <Tv_i, Ty> = 0 so the returned thetas are orthonormal in the original
// frame.
FindResult find_directions(MarginalEvaluator& eval, const GridD& grid, double L_K,
                           const Eigen::MatrixXd& original_frame,
                           const FindOptions& opts);

struct ThetaCertification {
    MomentProfile profile;  // original-frame profile over the dense grid
    double sup_ratio = 0.0;
    double sup_at = 0.0;
    double inf_ratio = 0.0;
    double inf_at = 0.0;
    bool bounds_pass = false;
    bool endpoint_checked = false;
    bool endpoint_pass = true;
    double support_radius = 0.0;
    double norm_at_n = 0.0;
    bool pass = false;
};

struct CertifyReport {
    std::vector<ThetaCertification> per_theta;
    double c1 = 0.2;
    double C1 = 3.0;
    double empirical_c = 0.0;  // min over thetas of inf ratio
    double empirical_C = 0.0;  // max over thetas of sup ratio
    double grid_max = 0.0;
    bool truncated = false;
    bool all_pass = false;
    nlohmann::json to_json() const;
};

// Re-estimates each direction's profile on the dense grid 2^{j/2} (up to n
// on the quadrature path, up to p_max on the Monte Carlo path), checks the
// two-sided ratio bounds value(q)/(sqrt(q) value(2)) in [c1, C1], and runs
// the endpoint comparison R <= 8 ||X_theta||_n whenever both the support
// radius and the n-th norm are computable. Writes pass/fail flags back
// into the set.
CertifyReport certify(const MarginalEvaluator& eval, const BodySpec* body,
                      DirectionSet& set, bool full_grid_up_to_n, double c1 = 0.2,
                      double C1 = 3.0);

}  // namespace subgauss
