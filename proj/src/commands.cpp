#include "posobs/commands.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "posobs/fixtures.hpp"

namespace posobs {

namespace {

const char* verdict(bool ok) { return ok ? "pass" : "FAIL"; }

void print_vec(std::ostream& os, const Vec& v) {
    os << '[';
    for (std::size_t k = 0; k < v.size(); ++k) os << (k ? ", " : "") << v[k];
    os << ']';
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const SynthesisError& e) {
        err << "synthesis failed: " << e.what() << '\n';
        return kExitFail;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFail;
    }
}

}  // namespace

ObserverRealization observer_from_problem(const ProblemFile& pf) {
    if (!pf.observer) throw InputError("problem has no 'observer' block (run synthesize first)");
    return build_observer(pf.system, pf.observer->gain, pf.observer->omega0_lower, pf.observer->omega0_upper);
}

ConditionReport evaluate_conditions(const ProblemFile& pf, const ObserverRealization& obs) {
    return pf.system.subsystems() == 1 ? check_corollary(pf.system, obs) : check_conditions(pf.system, obs);
}

void print_condition_report(std::ostream& os, const ConditionReport& rep) {
    const bool ct = rep.domain == Domain::continuous;
    os << "domain: " << to_string(rep.domain) << (rep.corollary ? " (single subsystem)" : "") << '\n';
    os << "  (i)   Ahat_lower " << (ct ? "Metzler        " : "nonnegative    ") << ": " << verdict(rep.structure_ok)
       << '\n';
    os << "  (ii)  G_lower >= 0              : " << verdict(rep.gain_injection_ok) << '\n';
    os << "  (iii) " << (rep.corollary ? (ct ? "Ahat_upper Hurwitz        " : "Ahat_upper Schur          ")
                                       : "copositive Lyapunov (LP)  ")
       << ": " << verdict(rep.stability_ok) << '\n';
    os << "  (iv)  initial-state bracket     : " << verdict(rep.initial_ok) << '\n';
    if (rep.certificate) {
        os << "  lambda = ";
        print_vec(os, rep.certificate->lambda);
        os << ", margin " << rep.certificate->margin << ", residuals ";
        print_vec(os, rep.certificate->residuals);
        os << '\n';
    }
    if (rep.lp_agrees) os << "  LP agrees with M-matrix test: " << (*rep.lp_agrees ? "yes" : "no") << '\n';
    os << "  first violation: " << (rep.first_violation.empty() ? "none" : rep.first_violation) << '\n';
    for (const std::string& n : rep.notes) os << "  note: " << n << '\n';
    os << "result: " << (rep.passed() ? "PASS" : "FAIL") << '\n';
}

int check_problem(const ProblemFile& pf, std::ostream& out) {
    const ObserverRealization obs = observer_from_problem(pf);
    const ConditionReport rep = evaluate_conditions(pf, obs);
    print_condition_report(out, rep);
    return rep.passed() ? kExitPass : kExitFail;
}

int synthesize_problem(const ProblemFile& pf, std::size_t budget, std::uint64_t seed, std::ostream& json_out,
                       std::ostream& log) {
    GainSearchOptions opts;
    opts.budget = budget;
    opts.seed = seed;
    std::optional<Mat> gain;
    std::optional<std::pair<Vec, Vec>> omega;
    if (pf.observer) {
        gain = pf.observer->gain;
        omega = std::make_pair(pf.observer->omega0_lower, pf.observer->omega0_upper);
    }
    const DesignResult res = run_design_procedure(pf.system, gain, omega, opts);
    for (const std::string& line : res.log) log << line << '\n';
    if (!res.report.passed()) {
        print_condition_report(log, res.report);
        log << "synthesis failed: supplied observer does not satisfy the conditions\n";
        return kExitFail;
    }
    nlohmann::json doc = to_json(pf);
    doc["observer"] = observer_to_json(res.observer);
    json_out << format_json(doc);
    return kExitPass;
}

SimulationSetup prepare_simulation(const ProblemFile& pf, const SimulateOptions& opts) {
    SimulationSetup s;
    s.system = pf.system;
    s.observer = observer_from_problem(pf);
    if (opts.sample_truth)
        s.truth = sample_truth(pf.system, *opts.sample_truth);
    else if (pf.truth)
        s.truth = *pf.truth;
    else
        throw InputError("problem has no 'truth' block (pass --sample-truth SEED to draw one)");
    validate_truth(s.system, s.truth);

    const SwitchingSpec sw = pf.switching.value_or(SwitchingSpec{});
    const std::uint64_t seed = sw.seed.value_or(kDefaultSwitchingSeed);
    const std::size_t count = pf.system.subsystems();
    if (pf.system.domain == Domain::continuous) {
        if (opts.steps) throw InputError("--steps applies to discrete-time problems");
        s.step = opts.step.value_or(pf.step.value_or(kDefaultStep));
        s.horizon = opts.horizon.value_or(sw.horizon.value_or(kDefaultHorizon));
        if (!(s.step > 0.0)) throw InputError("step must be > 0");
        if (!(s.horizon > 0.0)) throw InputError("horizon must be > 0");
        s.tol = opts.tol.value_or(kDefaultContinuousTol);
        s.signal = make_switching_signal(count, s.horizon, sw.min_dwell.value_or(kDefaultMinDwell), seed);
    } else {
        if (opts.horizon || opts.step) throw InputError("--horizon and --step apply to continuous-time problems");
        s.steps = opts.steps.value_or(sw.steps.value_or(kDefaultSteps));
        if (s.steps < 1) throw InputError("steps must be >= 1");
        s.tol = opts.tol.value_or(kDefaultDiscreteTol);
        const double dwell = sw.min_dwell.value_or(1.0);
        s.signal = make_discrete_switching_signal(count, s.steps, static_cast<std::size_t>(dwell), seed);
    }
    if (!(s.tol >= 0.0)) throw InputError("tol must be >= 0");
    return s;
}

SimulationTrace run_simulation(const SimulationSetup& s) {
    return s.system.domain == Domain::continuous
               ? simulate_continuous(s.system, s.truth, s.observer, s.signal, s.step, s.horizon)
               : simulate_discrete(s.system, s.truth, s.observer, s.signal, s.steps);
}

int simulate_problem(const ProblemFile& pf, const SimulateOptions& opts, std::ostream& csv, std::ostream& report) {
    const SimulationSetup setup = prepare_simulation(pf, opts);
    const SimulationTrace trace = run_simulation(setup);
    write_trace_csv(csv, trace);
    const BracketReport rep = verify_bracket(trace, setup.tol);
    report << "simulated " << trace.size() << " samples, " << setup.signal.indices.size() << " switching interval(s), seed "
           << setup.signal.seed << '\n';
    print_bracket_report(report, rep, setup.tol);
    return rep.total_violations() == 0 ? kExitPass : kExitFail;
}

int cmd_check(const std::string& path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] { return check_problem(load_problem(path), out); });
}

int cmd_synthesize(const std::string& path, std::size_t budget, std::uint64_t seed,
                   const std::optional<std::string>& out_path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ProblemFile pf = load_problem(path);
        std::ostringstream doc;
        const int code = synthesize_problem(pf, budget, seed, doc, err);
        if (code != kExitPass) return code;
        if (out_path) {
            std::ofstream f(*out_path, std::ios::binary);
            if (!f) throw InputError("cannot write '" + *out_path + "'");
            f << doc.str();
        } else {
            out << doc.str();
        }
        return code;
    });
}

int cmd_simulate(const std::string& path, const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ProblemFile pf = load_problem(path);
        if (opts.out) {
            std::ostringstream csv;
            std::ostringstream report;
            const int code = simulate_problem(pf, opts, csv, report);
            std::ofstream f(*opts.out, std::ios::binary);
            if (!f) throw InputError("cannot write '" + *opts.out + "'");
            f << csv.str();
            out << report.str();
            return code;
        }
        return simulate_problem(pf, opts, out, err);
    });
}

int cmd_reproduce(const std::string& id, std::ostream& out, std::ostream& err) {
    const std::optional<ProblemFile> pf = bundled_fixture(id);
    if (!pf) {
        err << "error: unknown example '" << id << "' (expected 4.1 or 4.2)\n";
        return kExitInput;
    }
    return guarded(err, [&] {
        const ObserverRealization obs = observer_from_problem(*pf);
        const ConditionReport rep = evaluate_conditions(*pf, obs);
        const SimulationSetup setup = prepare_simulation(*pf, {});
        const SimulationTrace trace = run_simulation(setup);
        const BracketReport br = verify_bracket(trace, setup.tol);
        const bool decays = br.xi_end < br.xi_start;
        const bool ok = rep.passed() && br.total_violations() == 0 && decays;

        const IntervalSystem& s = pf->system;
        out << "example " << id << ": " << to_string(s.domain) << ", n = " << s.n << ", p = " << s.p
            << ", N = " << s.subsystems() << '\n';
        auto row = [&](const std::string& k, const std::string& v) { out << "  " << std::left << std::setw(22) << k << v << '\n'; };
        auto num = [](double v) {
            std::ostringstream os;
            os << std::setprecision(6) << v;
            return os.str();
        };
        row("condition (i)", verdict(rep.structure_ok));
        row("condition (ii)", verdict(rep.gain_injection_ok));
        row("condition (iii)", verdict(rep.stability_ok));
        row("condition (iv)", verdict(rep.initial_ok));
        row("samples", std::to_string(trace.size()));
        row("switching intervals", std::to_string(setup.signal.indices.size()));
        row("sup |xi|", num(br.sup_xi));
        row("|xi| at start", num(br.xi_start));
        row("|xi| at end", num(br.xi_end));
        row("bracket tolerance", num(setup.tol));
        row("bracket violations", std::to_string(br.total_violations()));
        row("outputs exact", br.outputs_exact ? "yes" : "no");
        out << "result: " << (ok ? "REPRODUCED" : "NOT REPRODUCED") << '\n';
        return ok ? kExitPass : kExitFail;
    });
}

}  // namespace posobs
