#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "posobs/matcore.hpp"
#include "posobs/synth.hpp"

namespace posobs {

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kDefaultHorizon = 2.0;
inline constexpr std::size_t kDefaultSteps = 60;
inline constexpr double kDefaultMinDwell = 0.2;
inline constexpr double kDefaultContinuousTol = 1e-6;
inline constexpr double kDefaultDiscreteTol = 1e-12;

/// One admissible realization of an IntervalSystem.
struct TrueSystem {
    std::vector<Mat> a;
    Vec x0;
};

/// Throws InputError naming the first entry that leaves its interval.
void validate_truth(const IntervalSystem& sys, const TrueSystem& truth);

/// A_i uniform entrywise in [A_lower_i, A_upper_i], x0 uniform in its box.
[[nodiscard]] TrueSystem sample_truth(const IntervalSystem& sys, std::uint64_t seed);

/// Piecewise-constant switching signal: subsystem indices[k] (1-based) is
/// active on [switch_times[k], switch_times[k+1]), the last one up to horizon.
/// In discrete time the switch times are step indices.
struct SwitchingSignal {
    std::vector<double> switch_times;
    std::vector<int> indices;
    std::uint64_t seed = 0;
    double min_dwell = 0.0;
    double horizon = 0.0;

    /// Right-continuous lookup: the 1-based subsystem active at time t.
    [[nodiscard]] int index_at(double t) const;
    /// Throws std::invalid_argument if times are not increasing from 0, an
    /// index is outside 1..n_subsystems, or an interval is shorter than min_dwell.
    void validate(std::size_t n_subsystems) const;
};

/// Interval lengths uniform in [min_dwell, 2 min_dwell]; consecutive indices
/// differ when N > 1. A switch that would leave less than min_dwell before the
/// horizon is dropped, so every interval respects the dwell time. min_dwell = 0
/// draws lengths in (0, horizon / 10]. min_dwell >= horizon gives one interval.
[[nodiscard]] SwitchingSignal make_switching_signal(std::size_t n_subsystems, double horizon, double min_dwell,
                                                    std::uint64_t seed);

/// Discrete-time counterpart over `steps` samples; dwell in whole steps (>= 1).
[[nodiscard]] SwitchingSignal make_discrete_switching_signal(std::size_t n_subsystems, std::size_t steps,
                                                             std::size_t min_dwell_steps, std::uint64_t seed);

/// Time-indexed samples of the plant, both interval observers, and the two
/// comparison observers driven by the exact matrices of the realization.
struct SimulationTrace {
    Domain domain = Domain::continuous;
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> times;
    std::vector<int> sigma;
    std::vector<Vec> x;
    std::vector<Vec> y;
    std::vector<Vec> omega_lower;
    std::vector<Vec> omega_upper;
    std::vector<Vec> omega_exact_lower;  ///< exact-matrix observer started at omega0_lower
    std::vector<Vec> omega_exact_upper;  ///< exact-matrix observer started at omega0_upper
    std::vector<Vec> xhat_lower;
    std::vector<Vec> xhat_upper;
    std::vector<Vec> xi;         ///< xhat_upper - xhat_lower
    std::vector<Vec> eps_lower;  ///< F x - omega_exact_lower
    std::vector<Vec> eps_upper;  ///< omega_exact_upper - F x

    [[nodiscard]] std::size_t size() const { return times.size(); }
    /// Full coupled state (x, all four observer states) at sample k.
    [[nodiscard]] Vec state(std::size_t k) const;
};

/// Sample grid: multiples of step below the horizon, every switch time, and
/// the horizon itself.
[[nodiscard]] std::vector<double> simulation_grid(const SwitchingSignal& sig, double step, double horizon);

/// Classical RK4 on the coupled linear system over simulation_grid(). States are
/// continuous across switch instants. Throws NumericRangeError on blow-up.
[[nodiscard]] SimulationTrace simulate_continuous(const IntervalSystem& sys, const TrueSystem& truth,
                                                  const ObserverRealization& obs, const SwitchingSignal& sig,
                                                  double step, double horizon);

/// Exact iteration of the coupled recursions for samples k = 0..horizon_steps.
[[nodiscard]] SimulationTrace simulate_discrete(const IntervalSystem& sys, const TrueSystem& truth,
                                                const ObserverRealization& obs, const SwitchingSignal& sig,
                                                std::size_t horizon_steps);

struct LayerStats {
    std::size_t violations = 0;
    double worst = 0.0;
    std::size_t sample = 0;
    std::size_t component = 0;
};

struct BracketReport {
    LayerStats lower_nonneg;  ///< 0 <= xhat_lower
    LayerStats lower_below;   ///< xhat_lower <= x
    LayerStats upper_above;   ///< x <= xhat_upper
    double sup_xi = 0.0;
    double xi_start = 0.0;
    double xi_end = 0.0;
    /// Leading p components of both estimates are bit-equal to y.
    bool outputs_exact = false;

    [[nodiscard]] std::size_t total_violations() const {
        return lower_nonneg.violations + lower_below.violations + upper_above.violations;
    }
};

[[nodiscard]] BracketReport verify_bracket(const SimulationTrace& trace, double tol);

/// Violations of omega_lower <= omega_exact_lower <= omega_exact_upper <= omega_upper.
[[nodiscard]] std::size_t count_order_chain_violations(const SimulationTrace& trace, double tol);

/// Sup-norm distance of the coupled state over the samples both traces share.
[[nodiscard]] double trace_sup_distance(const SimulationTrace& a, const SimulationTrace& b);

/// Header `t,x1..xn,xhatl1..xhatln,xhatu1..xhatun,xi1..xin,sigma`, 17 significant digits.
void write_trace_csv(std::ostream& os, const SimulationTrace& trace);

void print_bracket_report(std::ostream& os, const BracketReport& rep, double tol);

}  // namespace posobs
