#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "posobs/problem_io.hpp"
#include "posobs/sim.hpp"

namespace posobs {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInput = 2 };

inline constexpr std::uint64_t kDefaultSwitchingSeed = 42;

struct SimulateOptions {
    std::optional<std::string> out;
    std::optional<std::uint64_t> sample_truth;
    std::optional<double> step;
    std::optional<double> horizon;
    std::optional<std::size_t> steps;
    std::optional<double> tol;
};

/// Everything a simulation run needs, resolved from a problem and overrides.
struct SimulationSetup {
    IntervalSystem system;
    TrueSystem truth;
    ObserverRealization observer;
    SwitchingSignal signal;
    double step = kDefaultStep;
    double horizon = kDefaultHorizon;
    std::size_t steps = kDefaultSteps;
    double tol = kDefaultContinuousTol;
};

/// Throws InputError when the observer block or truth is missing or invalid.
[[nodiscard]] SimulationSetup prepare_simulation(const ProblemFile& pf, const SimulateOptions& opts);
[[nodiscard]] SimulationTrace run_simulation(const SimulationSetup& setup);

/// Observer from the problem's observer block; throws InputError if absent.
[[nodiscard]] ObserverRealization observer_from_problem(const ProblemFile& pf);
/// Switched-system check, or the single-subsystem variant when N = 1.
[[nodiscard]] ConditionReport evaluate_conditions(const ProblemFile& pf, const ObserverRealization& obs);

void print_condition_report(std::ostream& os, const ConditionReport& rep);

int check_problem(const ProblemFile& pf, std::ostream& out);
/// Writes the problem with a full observer block to `json_out`; step log to `log`.
int synthesize_problem(const ProblemFile& pf, std::size_t budget, std::uint64_t seed, std::ostream& json_out,
                       std::ostream& log);
int simulate_problem(const ProblemFile& pf, const SimulateOptions& opts, std::ostream& csv, std::ostream& report);

int cmd_check(const std::string& path, std::ostream& out, std::ostream& err);
int cmd_synthesize(const std::string& path, std::size_t budget, std::uint64_t seed,
                   const std::optional<std::string>& out_path, std::ostream& out, std::ostream& err);
/// CSV goes to opts.out when given (report on `out`), otherwise CSV on `out` and report on `err`.
int cmd_simulate(const std::string& path, const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_reproduce(const std::string& id, std::ostream& out, std::ostream& err);

}  // namespace posobs
