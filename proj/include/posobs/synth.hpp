#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "posobs/certify.hpp"
#include "posobs/matcore.hpp"

namespace posobs {

/// Invalid problem data (violated standing assumption, bad dimensions, ...).
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

enum class Domain { continuous, discrete };

[[nodiscard]] const char* to_string(Domain d);

// ============================================================================
// Uncertain plant
// ============================================================================

/// Switched positive plant with interval uncertainty on every subsystem matrix
/// and on the initial state. The output matrix is implicitly C = [I_p 0].
struct IntervalSystem {
    Domain domain = Domain::continuous;
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<Mat> a_lower;
    std::vector<Mat> a_upper;
    Vec x0_lower;
    Vec x0_upper;

    [[nodiscard]] std::size_t subsystems() const { return a_lower.size(); }
    [[nodiscard]] std::size_t reduced() const { return n - p; }

    /// Re-checks every standing assumption; throws InputError naming the
    /// violated one, e.g. "Assumption 1(iii): A_lower[2] not Metzler at (3,1)".
    void validate() const;
};

/// Builds and validates an IntervalSystem; n is taken from x0_lower.
[[nodiscard]] IntervalSystem make_interval_system(Domain domain, std::size_t p, std::vector<Mat> a_lower,
                                                  std::vector<Mat> a_upper, Vec x0_lower, Vec x0_upper);

// ============================================================================
// Observer realization
// ============================================================================

/// Per-subsystem observer matrices (lower/upper dynamics and output injection).
struct SubsystemObserver {
    Mat ahat_lower;
    Mat ahat_upper;
    Mat g_lower;
    Mat g_upper;
};

/// Lower/upper reduced-order observer pair sharing one gain L:
///   w' = Ahat_i w + G_i y,  xhat = Chat w + Dhat y.
struct ObserverRealization {
    Mat gain = Mat(1, 1);  ///< L, (n-p) x p, nonnegative
    std::vector<SubsystemObserver> subsystems;
    Mat f = Mat(1, 1);     ///< [-L  I]
    Mat chat = Mat(1, 1);  ///< [0; I]
    Mat dhat = Mat(1, 1);  ///< [I; L]
    Vec omega0_lower;
    Vec omega0_upper;
};

/// Observer blocks for one subsystem with the cross pairing of bounds:
///   Ahat_lo = A_lo22 - L A_up12,  Ahat_up = A_up22 - L A_lo12,
///   G_lo = Ahat_lo L + A_lo21 - L A_up11,  G_up = Ahat_up L + A_up21 - L A_lo11.
/// Passing lower == upper gives the exact-matrix observer of a known realization.
[[nodiscard]] SubsystemObserver observer_blocks(const Mat& lower, const Mat& upper, const Mat& gain, std::size_t p);

/// Throws InputError on shape mismatch or a negative gain entry.
[[nodiscard]] ObserverRealization build_observer(const IntervalSystem& sys, const Mat& gain, const Vec& omega0_lower,
                                                 const Vec& omega0_upper);

/// Extreme admissible initial observer states for gain L:
///   lower = max(0, x0_lo^2 - L x0_up^1),  upper = x0_up^2 - L x0_lo^1.
[[nodiscard]] std::pair<Vec, Vec> tight_omegas(const IntervalSystem& sys, const Mat& gain);

// ============================================================================
// Condition checks
// ============================================================================

struct ConditionReport {
    Domain domain = Domain::continuous;
    bool corollary = false;

    bool structure_ok = false;       ///< (i)   Ahat_lower Metzler / nonnegative
    bool gain_injection_ok = false;  ///< (ii)  G_lower >= 0
    bool stability_ok = false;       ///< (iii) common copositive Lyapunov / Hurwitz / Schur
    bool initial_ok = false;         ///< (iv)  initial-state bracket, including omega0_lower >= 0

    std::optional<Certificate> certificate;
    std::string first_violation;
    std::vector<std::string> notes;

    /// Derived property: every Ahat_upper is Metzler (continuous) / nonnegative (discrete).
    bool ahat_upper_structure = false;
    /// Corollary checks only: whether the LP verdict matched the Hurwitz/Schur test.
    std::optional<bool> lp_agrees;

    /// Sum of violation magnitudes over all four conditions; 0 when passed.
    double penalty = 0.0;

    [[nodiscard]] bool passed() const { return structure_ok && gain_injection_ok && stability_ok && initial_ok; }
};

[[nodiscard]] ConditionReport check_theorem1(const IntervalSystem& sys, const ObserverRealization& obs,
                                             double margin = kDefaultMargin);
[[nodiscard]] ConditionReport check_theorem2(const IntervalSystem& sys, const ObserverRealization& obs,
                                             double margin = kDefaultMargin);
/// Single-subsystem variant: (iii) is decided by the M-matrix Hurwitz/Schur test.
[[nodiscard]] ConditionReport check_corollary(const IntervalSystem& sys, const ObserverRealization& obs);
/// Dispatches to check_theorem1 or check_theorem2 by domain.
[[nodiscard]] ConditionReport check_conditions(const IntervalSystem& sys, const ObserverRealization& obs,
                                               double margin = kDefaultMargin);

// ============================================================================
// Gain synthesis
// ============================================================================

enum class OmegaPolicy { tight, given };

struct GainSearchOptions {
    OmegaPolicy policy = OmegaPolicy::tight;
    std::size_t budget = 2000;
    std::uint64_t seed = 1;
    /// Used only with OmegaPolicy::given.
    Vec omega0_lower;
    Vec omega0_upper;
};

struct GainSearchResult {
    std::optional<ObserverRealization> observer;
    ConditionReport report;  ///< report of the returned observer, or of the best candidate
    Mat best_gain = Mat(1, 1);
    double best_penalty = 0.0;
    std::size_t candidates = 0;

    [[nodiscard]] bool found() const { return observer.has_value(); }
};

/// L = 0 first, then a seeded randomized local search over L >= 0 (single
/// coordinate and joint moves, adaptive step)
/// minimizing the condition-violation penalty. Deterministic given the seed.
[[nodiscard]] GainSearchResult search_gain(const IntervalSystem& sys, const GainSearchOptions& opts = {});

/// Raised when the design procedure cannot produce a gain.
class SynthesisError : public std::runtime_error {
public:
    SynthesisError(const std::string& msg, double best_penalty, std::size_t candidates)
        : std::runtime_error(msg), best_penalty(best_penalty), candidates(candidates) {}
    double best_penalty;
    std::size_t candidates;
};

struct DesignResult {
    ObserverRealization observer;
    ConditionReport report;
    std::vector<std::string> log;
};

/// The six-step design procedure: dimensions, partition, initial observer
/// states, gain (given or searched), observer matrices, assembly.
/// Throws SynthesisError when the search comes up empty.
[[nodiscard]] DesignResult run_design_procedure(const IntervalSystem& sys, const std::optional<Mat>& gain = std::nullopt,
                                                const std::optional<std::pair<Vec, Vec>>& omega = std::nullopt,
                                                const GainSearchOptions& search = {});

}  // namespace posobs
