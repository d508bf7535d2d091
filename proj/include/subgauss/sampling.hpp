#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "subgauss/bodies.hpp"

namespace subgauss {

enum class SampleMethod { Direct, HitAndRun };

struct HitAndRunOptions {
    int burn_in = -1;   // default max(10*n, 1000)
    int thinning = -1;  // default n
    int chains = 8;     // logical chains, independent of thread count
};

struct SampleBatch {
    Eigen::MatrixXd points;  // N x n, row per sample
    std::uint64_t seed = 0;
    SampleMethod method = SampleMethod::Direct;
    std::string source;

    std::int64_t size() const { return points.rows(); }
    int dim() const { return static_cast<int>(points.cols()); }
};

// Uniform samples from a body. Every sample index owns its own counter
// stream, so batches are bit-identical for any worker count. Hit-and-run
// runs a fixed set of logical chains with points interleaved round-robin.
SampleBatch sample_uniform(const BodySpec& body, std::int64_t N, std::uint64_t seed,
                           SampleMethod method,
                           const HitAndRunOptions& opts = HitAndRunOptions{},
                           int threads = 1);

SampleBatch sample_gaussian(int n, std::int64_t N, std::uint64_t seed,
                            int threads = 1);

/// Applies a linear map to every point (used to move batches into
/// isotropic position).
SampleBatch transform_batch(const SampleBatch& batch, const Eigen::MatrixXd& T);

struct DirectionCheck {
    double ks_stat = 0.0;
    double ks_critical = 0.0;
    bool flagged = false;
    double mean_gap_sigmas = 0.0;
    double var_ratio = 1.0;
};

struct ValidationReport {
    std::vector<DirectionCheck> directions;
    int flagged_count = 0;
    double max_ks = 0.0;
    bool pass = false;
    nlohmann::json to_json() const;
};

// Two-sample Kolmogorov-Smirnov comparison of two batches along 20 random
// directions (1% critical value), plus first/second moment diagnostics.
ValidationReport validate_sampler(const BodySpec& body, const SampleBatch& reference,
                                  const SampleBatch& trial);

/// Kernel-density marginal of a batch along a direction (Silverman
/// bandwidth, Gaussian kernel); the NumericalProjection fallback for
/// directions without a closed form.
MarginalDensity numerical_marginal(const SampleBatch& batch,
                                   const Eigen::VectorXd& theta);

// Little-endian binary batch format: uint32 N, uint32 n, then N*n float64
// row-major.
void write_batch_bin(const std::string& path, const SampleBatch& batch);
SampleBatch read_batch_bin(const std::string& path);
void write_batch_csv(const std::string& path, const SampleBatch& batch);

}  // namespace subgauss
