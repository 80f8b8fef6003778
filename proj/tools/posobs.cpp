#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "posobs/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Interval reduced-order observers for uncertain switched positive systems"};
    app.require_subcommand(1);

    std::string file;
    std::string example;
    std::size_t budget = 2000;
    std::uint64_t seed = 1;
    std::optional<std::string> out_path;
    posobs::SimulateOptions sim;

    auto* check = app.add_subcommand("check", "Evaluate the observer conditions for a problem file");
    check->add_option("file", file, "Problem JSON")->required();

    auto* synth = app.add_subcommand("synthesize", "Search for an observer gain and emit the completed problem");
    synth->add_option("file", file, "Problem JSON")->required();
    synth->add_option("--budget", budget, "Maximum number of gain candidates")->check(CLI::PositiveNumber);
    synth->add_option("--seed", seed, "Search seed");
    synth->add_option("--out", out_path, "Write JSON here instead of stdout");

    auto* simulate = app.add_subcommand("simulate", "Co-simulate plant and observers, export CSV, verify the bracket");
    simulate->add_option("file", file, "Problem JSON")->required();
    simulate->add_option("--out", sim.out, "Write CSV here instead of stdout");
    simulate->add_option("--sample-truth", sim.sample_truth, "Draw an admissible truth with this seed");
    simulate->add_option("--step", sim.step, "RK4 step (continuous)");
    auto* horizon = simulate->add_option("--horizon", sim.horizon, "Horizon in seconds (continuous)");
    auto* steps = simulate->add_option("--steps", sim.steps, "Number of steps (discrete)");
    horizon->excludes(steps);
    simulate->add_option("--tol", sim.tol, "Bracket tolerance");

    auto* reproduce = app.add_subcommand("reproduce", "Check and simulate a bundled example");
    reproduce->add_option("example", example, "4.1 or 4.2")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return posobs::kExitInput;
    }

    if (check->parsed()) return posobs::cmd_check(file, std::cout, std::cerr);
    if (synth->parsed()) return posobs::cmd_synthesize(file, budget, seed, out_path, std::cout, std::cerr);
    if (simulate->parsed()) return posobs::cmd_simulate(file, sim, std::cout, std::cerr);
    return posobs::cmd_reproduce(example, std::cout, std::cerr);
}
