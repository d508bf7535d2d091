#pragma once

#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "subgauss/bodies.hpp"
#include "subgauss/moments.hpp"
#include "subgauss/sampling.hpp"

namespace subgauss {

// Oracle for y -> ||<.,y>||_p. The direction search and the certification
// pass only see this interface; behind it sits either a sample batch or
// closed-form marginal quadrature.
class MarginalEvaluator {
public:
    virtual ~MarginalEvaluator() = default;
    virtual int dim() const = 0;
    /// Largest usable moment order (infinite on the quadrature path).
    virtual double max_p() const = 0;
    virtual Estimate eval(const Eigen::VectorXd& y, double p) const = 0;
    virtual std::vector<Estimate> eval_multi(const Eigen::VectorXd& y,
                                             const std::vector<double>& ps) const;
    /// Point value without confidence work; fast path for mass/volume
    /// membership loops.
    virtual double value_only(const Eigen::VectorXd& y, double p) const {
        return eval(y, p).value;
    }
    /// Double the sample budget (membership tie-break); false if the
    /// evaluator cannot grow.
    virtual bool grow() { return false; }

    std::int64_t calls() const { return calls_; }

protected:
    mutable std::int64_t calls_ = 0;
};

/// Monte Carlo evaluator over a (lazily growable) uniform batch, optionally
/// pushed through a linear map first (isotropic position).
class McEvaluator final : public MarginalEvaluator {
public:
    McEvaluator(const BodySpec& body, std::int64_t N, std::uint64_t seed,
                SampleMethod method, HitAndRunOptions opts = HitAndRunOptions{},
                int threads = 1,
                std::optional<Eigen::MatrixXd> transform = std::nullopt);
    explicit McEvaluator(SampleBatch batch, int threads = 1);

    int dim() const override;
    double max_p() const override;
    Estimate eval(const Eigen::VectorXd& y, double p) const override;
    std::vector<Estimate> eval_multi(const Eigen::VectorXd& y,
                                     const std::vector<double>& ps) const override;
    double value_only(const Eigen::VectorXd& y, double p) const override;
    bool grow() override;

    const SampleBatch& batch() const { return batch_; }

private:
    std::optional<BodySpec> body_;  // present when growth is possible
    SampleMethod method_ = SampleMethod::Direct;
    HitAndRunOptions opts_;
    std::optional<Eigen::MatrixXd> transform_;
    std::uint64_t seed_ = 0;
    int threads_ = 1;
    std::int64_t max_samples_ = 0;
    SampleBatch batch_;
};

/// Quadrature evaluator for bodies whose covariance is a known diagonal,
/// so isotropic position is a closed-form diagonal map and coordinate
/// (and ball: all) directions keep closed-form marginals.
class QuadEvaluator final : public MarginalEvaluator {
public:
    explicit QuadEvaluator(const BodySpec& body, bool isotropic_frame = true);

    int dim() const override;
    double max_p() const override { return std::numeric_limits<double>::infinity(); }
    bool supports(const Eigen::VectorXd& y) const;
    Estimate eval(const Eigen::VectorXd& y, double p) const override;
    double value_only(const Eigen::VectorXd& y, double p) const override;

    double L_K() const { return L_K_; }

private:
    // unit-direction norms keyed by (marginal axis, p); the ball uses one
    // shared axis slot since every direction has the same law
    double unit_norm(const Eigen::VectorXd& w, double p) const;

    BodySpec body_;
    Eigen::VectorXd diag_T_;  // identity when isotropic_frame == false
    double L_K_ = 0.0;
    mutable std::vector<std::pair<std::pair<int, double>, double>> cache_;
    mutable std::mutex cache_mutex_;
};

/// Quadrature when the direction admits a closed form, Monte Carlo
/// fallback otherwise (the CLI "auto" mode, original frame).
class AutoEvaluator final : public MarginalEvaluator {
public:
    AutoEvaluator(const BodySpec& body, std::shared_ptr<McEvaluator> mc);

    int dim() const override;
    double max_p() const override { return mc_->max_p(); }
    Estimate eval(const Eigen::VectorXd& y, double p) const override;
    bool grow() override { return mc_->grow(); }

private:
    BodySpec body_;
    std::shared_ptr<McEvaluator> mc_;
};

/// Diagonal closed-form isotropy data: (diagonal of T, L_K). Available for
/// the cube, balls and cones over cubes; empty for bodies whose covariance
/// is not a known diagonal (simplex, oracle polytopes).
std::optional<std::pair<Eigen::VectorXd, double>> closed_form_isotropy(
    const BodySpec& body);

/// Moment profile of a direction over a grid; entries above the
/// evaluator's p_max are dropped and flagged as truncation.
MomentProfile make_profile(const MarginalEvaluator& eval,
                           const Eigen::VectorXd& theta,
                           const std::vector<double>& grid, double L_K);

/// {2^{j/2} : j >= 0, 2^{j/2} <= limit}; the certification grid.
std::vector<double> half_dyadic_grid(double limit);

}  // namespace subgauss
