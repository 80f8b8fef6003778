#pragma once

#include <optional>
#include <span>

#include "posobs/matcore.hpp"

namespace posobs {

inline constexpr double kDefaultMargin = 1e-6;
inline constexpr double kMinMargin = 1e-8;

/// Witness of a common linear copositive Lyapunov function V(x) = lambda^T x
/// for the family {M_i}: lambda >= margin and M_i^T lambda <= -margin.
struct Certificate {
    Vec lambda;
    double margin = 0.0;
    /// max_j (M_i^T lambda)_j for each i.
    Vec residuals;
};

/// Outcome of a feasibility solve. `infeasibility` is the optimal phase-1
/// objective (sum of artificial variables) and is 0 when a certificate exists.
struct LambdaSearch {
    std::optional<Certificate> certificate;
    double infeasibility = 0.0;
    double margin = 0.0;

    [[nodiscard]] bool feasible() const { return certificate.has_value(); }
};

/// Decide whether {lambda : margin <= lambda <= 1, M_i^T lambda <= -margin for all i}
/// is nonempty with a dense phase-1 simplex (Bland's rule). The upper bound fixes
/// the scale of the otherwise homogeneous system, so `margin` is meaningful.
/// On success lambda is rescaled so that max(lambda) = 1.
///
/// Throws std::invalid_argument on empty input, shape mismatch or margin <= 0.
[[nodiscard]] LambdaSearch find_lambda(std::span<const Mat> mats, double margin);

/// find_lambda at margin, margin/10, ... down to min_margin (inclusive).
/// Returns the first feasible result, or the last (smallest-margin) failure.
[[nodiscard]] LambdaSearch find_lambda_sweep(std::span<const Mat> mats, double margin = kDefaultMargin,
                                             double min_margin = kMinMargin);

/// Independent re-evaluation of both inequality families by direct products.
[[nodiscard]] bool check_lambda(std::span<const Mat> mats, const Certificate& cert);

}  // namespace posobs
