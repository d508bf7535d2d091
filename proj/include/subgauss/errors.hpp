#pragma once

#include <stdexcept>
#include <string>

namespace subgauss {

// Domain error taxonomy. Each maps to one failure mode of the public API;
// callers that want a single catch point can use SubgaussError.
struct SubgaussError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParam : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct DimensionMismatch : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct Unsupported : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct NoInteriorPoint : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct BadBurnIn : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct InsufficientSamples : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct SingularCovariance : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct DependentInput : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct PTooLargeForBudget : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct QOutOfRange : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct EmptyProfile : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct DimensionTooSmall : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct AsymmetricInput : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct UnresolvableMass : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct NoSupportFunction : SubgaussError {
    using SubgaussError::SubgaussError;
};
struct InvalidMoments : SubgaussError {
    using SubgaussError::SubgaussError;
};

}  // namespace subgauss
