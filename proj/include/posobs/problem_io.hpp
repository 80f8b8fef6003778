#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "posobs/sim.hpp"
#include "posobs/synth.hpp"

namespace posobs {

struct ObserverSpec {
    Mat gain = Mat(1, 1);
    Vec omega0_lower;
    Vec omega0_upper;
};

/// `horizon` is used in continuous time, `steps` in discrete time. In discrete
/// time min_dwell counts steps.
struct SwitchingSpec {
    std::optional<std::uint64_t> seed;
    std::optional<double> min_dwell;
    std::optional<double> horizon;
    std::optional<std::size_t> steps;
};

/// In-memory form of a problem document.
struct ProblemFile {
    IntervalSystem system;
    std::optional<TrueSystem> truth;
    std::optional<ObserverSpec> observer;
    std::optional<SwitchingSpec> switching;
    std::optional<double> step;
    std::string comment;
};

/// Throws InputError with a message naming the offending key or assumption.
[[nodiscard]] ProblemFile parse_problem(const nlohmann::json& doc);
[[nodiscard]] ProblemFile parse_problem_text(std::string_view text);
[[nodiscard]] ProblemFile load_problem(const std::string& path);

[[nodiscard]] nlohmann::json matrix_to_json(const Mat& m);
[[nodiscard]] nlohmann::json to_json(const ProblemFile& pf);
/// Observer block with L, both initial states and every derived matrix.
[[nodiscard]] nlohmann::json observer_to_json(const ObserverRealization& obs);
/// Two-space indented JSON, numeric rows on one line, trailing newline.
[[nodiscard]] std::string format_json(const nlohmann::json& doc);
[[nodiscard]] std::string serialize_problem(const ProblemFile& pf);

}  // namespace posobs
