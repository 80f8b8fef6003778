#pragma once

#include <optional>
#include <string_view>

#include "posobs/problem_io.hpp"

namespace posobs {

/// Bundled examples: "4.1" (continuous, 5 states, 3 subsystems) and "4.2"
/// (discrete, 4 states, 3 subsystems), each with truth, observer and switching.
[[nodiscard]] std::optional<ProblemFile> bundled_fixture(std::string_view id);

[[nodiscard]] ProblemFile continuous_example();
[[nodiscard]] ProblemFile discrete_example();

}  // namespace posobs
