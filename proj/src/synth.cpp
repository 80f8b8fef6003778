#include "posobs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace posobs {

const char* to_string(Domain d) { return d == Domain::continuous ? "continuous" : "discrete"; }

namespace {

template <typename... Args>
std::string cat(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    return os.str();
}

int assumption_number(Domain d) { return d == Domain::continuous ? 1 : 2; }

// x = [x^1; x^2] split at p.
std::pair<Vec, Vec> split(const Vec& x, std::size_t p) {
    return {Vec(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(p)),
            Vec(x.begin() + static_cast<std::ptrdiff_t>(p), x.end())};
}

void check_finite(const Mat& m, const std::string& name) {
    for (double v : m.entries())
        if (!std::isfinite(v)) throw InputError(name + " has a non-finite entry");
}

void check_observer_shape(const IntervalSystem& sys, const ObserverRealization& obs) {
    const std::size_t q = sys.reduced();
    if (obs.gain.rows() != q || obs.gain.cols() != sys.p)
        throw InputError(cat("observer gain L must be ", q, "x", sys.p));
    if (obs.subsystems.size() != sys.subsystems())
        throw InputError("observer and system disagree on the number of subsystems");
    if (obs.omega0_lower.size() != q || obs.omega0_upper.size() != q)
        throw InputError(cat("observer initial states must have length ", q));
}

// Accumulates per-condition verdicts, the first violation and the penalty.
struct Tally {
    ConditionReport& rep;
    double tol = kDefaultTol;

    void violation(const std::string& what) {
        if (rep.first_violation.empty()) rep.first_violation = what;
    }

    // Entries of m that must be >= 0 (off-diagonal only when metzler is set).
    bool sign_condition(const Mat& m, bool metzler, const char* cond, const char* name, std::size_t subsystem) {
        bool ok = true;
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) {
                if (metzler && r == c) continue;
                const double v = m(r, c);
                if (v >= -tol) continue;
                ok = false;
                rep.penalty += -v;
                violation(cat(cond, " subsystem ", subsystem + 1, ": ", name, "(", r + 1, ",", c + 1, ") = ", v,
                              metzler ? " is a negative off-diagonal entry (must be Metzler)" : " is negative"));
            }
        return ok;
    }
};

bool initial_condition(const IntervalSystem& sys, const ObserverRealization& obs, Tally& t) {
    const auto [xl1, xl2] = split(sys.x0_lower, sys.p);
    const auto [xu1, xu2] = split(sys.x0_upper, sys.p);
    const Vec lo_bound = sub(xl2, obs.gain * xu1);
    const Vec up_bound = sub(xu2, obs.gain * xl1);
    bool ok = true;
    for (std::size_t k = 0; k < lo_bound.size(); ++k) {
        const double wl = obs.omega0_lower[k];
        const double wu = obs.omega0_upper[k];
        if (wl < -t.tol) {
            ok = false;
            t.rep.penalty += -wl;
            t.violation(cat("(iv) omega0_lower[", k + 1, "] = ", wl, " is negative"));
        }
        if (wl > lo_bound[k] + t.tol) {
            ok = false;
            t.rep.penalty += wl - lo_bound[k];
            t.violation(cat("(iv) omega0_lower[", k + 1, "] = ", wl, " exceeds x0_lower^2 - L x0_upper^1 = ", lo_bound[k]));
        }
        if (up_bound[k] > wu + t.tol) {
            ok = false;
            t.rep.penalty += up_bound[k] - wu;
            t.violation(cat("(iv) omega0_upper[", k + 1, "] = ", wu, " is below x0_upper^2 - L x0_lower^1 = ", up_bound[k]));
        }
    }
    return ok;
}

// Penalty contribution for an infeasible copositive LP, measured on the
// rescaled problem {1 <= lambda <= 1e3, M^T lambda <= -1}.
double lyapunov_penalty(std::span<const Mat> mats) {
    constexpr double probe = 1e-3;
    const LambdaSearch s = find_lambda(mats, probe);
    return std::max(s.infeasibility / probe, 1e-9);
}

std::vector<Mat> stability_family(const IntervalSystem& sys, const ObserverRealization& obs) {
    std::vector<Mat> mats;
    for (const SubsystemObserver& s : obs.subsystems) {
        if (sys.domain == Domain::continuous)
            mats.push_back(s.ahat_upper);
        else
            mats.push_back(s.ahat_upper - Mat::identity(sys.reduced()));
    }
    return mats;
}

ConditionReport check_structure(const IntervalSystem& sys, const ObserverRealization& obs, bool corollary) {
    check_observer_shape(sys, obs);
    ConditionReport rep;
    rep.domain = sys.domain;
    rep.corollary = corollary;
    Tally t{rep};
    const bool metzler = sys.domain == Domain::continuous;

    rep.structure_ok = true;
    rep.gain_injection_ok = true;
    rep.ahat_upper_structure = true;
    for (std::size_t i = 0; i < obs.subsystems.size(); ++i)
        rep.structure_ok &= t.sign_condition(obs.subsystems[i].ahat_lower, metzler, "(i)", "Ahat_lower", i);
    for (std::size_t i = 0; i < obs.subsystems.size(); ++i)
        rep.gain_injection_ok &= t.sign_condition(obs.subsystems[i].g_lower, false, "(ii)", "G_lower", i);
    for (const SubsystemObserver& s : obs.subsystems)
        rep.ahat_upper_structure &= metzler ? is_metzler(s.ahat_upper, kDefaultTol) : is_nonneg(s.ahat_upper, kDefaultTol);
    if (rep.structure_ok && !rep.ahat_upper_structure)
        rep.notes.push_back("diagnostic: Ahat_upper lost its sign structure although (i) holds");
    rep.notes.push_back("(iv) also requires omega0_lower >= 0 (observer initial states are nonnegative)");
    return rep;
}

ConditionReport check_theorem(const IntervalSystem& sys, const ObserverRealization& obs, double margin) {
    ConditionReport rep = check_structure(sys, obs, false);
    Tally t{rep};

    const std::vector<Mat> mats = stability_family(sys, obs);
    const LambdaSearch lp = find_lambda_sweep(mats, std::max(margin, kMinMargin), kMinMargin);
    rep.stability_ok = lp.feasible();
    if (lp.feasible()) {
        rep.certificate = lp.certificate;
    } else {
        rep.penalty += lyapunov_penalty(mats);
        t.violation(sys.domain == Domain::continuous
                        ? "(iii) no lambda > 0 with Ahat_upper_i^T lambda < 0 for all i"
                        : "(iii) no lambda > 0 with (Ahat_upper_i - I)^T lambda < 0 for all i");
    }
    rep.initial_ok = initial_condition(sys, obs, t);
    return rep;
}

// Uniform double in [0, 1) from the top 53 bits, independent of the
// standard library's distribution implementation.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

// ----------------------------------------------------------------------------
// IntervalSystem
// ----------------------------------------------------------------------------

void IntervalSystem::validate() const {
    const int asn = assumption_number(domain);
    if (p < 1 || p >= n) throw InputError(cat("invalid partition: need 1 <= p < n, got p=", p, " n=", n));
    if (a_lower.empty()) throw InputError("at least one subsystem is required");
    if (a_lower.size() != a_upper.size())
        throw InputError(cat("A_lower has ", a_lower.size(), " matrices but A_upper has ", a_upper.size()));
    if (x0_lower.size() != n || x0_upper.size() != n) throw InputError(cat("x0 bounds must have length n=", n));

    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(x0_lower[k]) || !std::isfinite(x0_upper[k])) throw InputError("x0 bounds must be finite");
        if (x0_lower[k] < 0.0)
            throw InputError(cat("Assumption ", asn, "(i): x0_lower[", k + 1, "] = ", x0_lower[k], " is negative"));
        if (x0_lower[k] > x0_upper[k])
            throw InputError(cat("Assumption ", asn, "(i): x0_lower[", k + 1, "] exceeds x0_upper[", k + 1, "]"));
    }
    for (std::size_t i = 0; i < a_lower.size(); ++i) {
        const Mat& lo = a_lower[i];
        const Mat& up = a_upper[i];
        if (lo.rows() != n || lo.cols() != n || up.rows() != n || up.cols() != n)
            throw InputError(cat("A_lower[", i + 1, "]/A_upper[", i + 1, "] must be ", n, "x", n));
        check_finite(lo, cat("A_lower[", i + 1, "]"));
        check_finite(up, cat("A_upper[", i + 1, "]"));
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) {
                if (lo(r, c) > up(r, c))
                    throw InputError(cat("Assumption ", asn, "(ii): A_lower[", i + 1, "] exceeds A_upper[", i + 1,
                                         "] at (", r + 1, ",", c + 1, ")"));
                const bool checked = domain == Domain::discrete || r != c;
                if (checked && lo(r, c) < 0.0)
                    throw InputError(cat("Assumption ", asn, "(iii): A_lower[", i + 1, "] ",
                                         domain == Domain::continuous ? "not Metzler" : "has a negative entry", " at (",
                                         r + 1, ",", c + 1, ")"));
            }
    }
}

IntervalSystem make_interval_system(Domain domain, std::size_t p, std::vector<Mat> a_lower, std::vector<Mat> a_upper,
                                    Vec x0_lower, Vec x0_upper) {
    IntervalSystem sys;
    sys.domain = domain;
    sys.n = x0_lower.size();
    sys.p = p;
    sys.a_lower = std::move(a_lower);
    sys.a_upper = std::move(a_upper);
    sys.x0_lower = std::move(x0_lower);
    sys.x0_upper = std::move(x0_upper);
    sys.validate();
    return sys;
}

// ----------------------------------------------------------------------------
// Observer construction
// ----------------------------------------------------------------------------

SubsystemObserver observer_blocks(const Mat& lower, const Mat& upper, const Mat& gain, std::size_t p) {
    const PartitionedBlocks lo = partition(lower, p);
    const PartitionedBlocks up = partition(upper, p);
    Mat ahat_lower = lo.a22 - gain * up.a12;
    Mat ahat_upper = up.a22 - gain * lo.a12;
    Mat g_lower = ahat_lower * gain + lo.a21 - gain * up.a11;
    Mat g_upper = ahat_upper * gain + up.a21 - gain * lo.a11;
    return {std::move(ahat_lower), std::move(ahat_upper), std::move(g_lower), std::move(g_upper)};
}

ObserverRealization build_observer(const IntervalSystem& sys, const Mat& gain, const Vec& omega0_lower,
                                   const Vec& omega0_upper) {
    const std::size_t n = sys.n;
    const std::size_t p = sys.p;
    const std::size_t q = sys.reduced();
    if (gain.rows() != q || gain.cols() != p) throw InputError(cat("observer gain L must be ", q, "x", p));
    check_finite(gain, "observer gain L");
    for (std::size_t r = 0; r < q; ++r)
        for (std::size_t c = 0; c < p; ++c)
            if (gain(r, c) < 0.0) throw InputError(cat("observer gain L(", r + 1, ",", c + 1, ") is negative"));
    if (omega0_lower.size() != q || omega0_upper.size() != q)
        throw InputError(cat("observer initial states must have length ", q));

    Mat f(q, n);
    f.set_block(0, 0, -1.0 * gain);
    f.set_block(0, p, Mat::identity(q));
    Mat chat(n, q);
    chat.set_block(p, 0, Mat::identity(q));
    Mat dhat(n, p);
    dhat.set_block(0, 0, Mat::identity(p));
    dhat.set_block(p, 0, gain);

    std::vector<SubsystemObserver> subs;
    subs.reserve(sys.subsystems());
    for (std::size_t i = 0; i < sys.subsystems(); ++i)
        subs.push_back(observer_blocks(sys.a_lower[i], sys.a_upper[i], gain, p));

    return {gain, std::move(subs), std::move(f), std::move(chat), std::move(dhat), omega0_lower, omega0_upper};
}

std::pair<Vec, Vec> tight_omegas(const IntervalSystem& sys, const Mat& gain) {
    const auto [xl1, xl2] = split(sys.x0_lower, sys.p);
    const auto [xu1, xu2] = split(sys.x0_upper, sys.p);
    Vec lower = sub(xl2, gain * xu1);
    for (double& v : lower) v = std::max(0.0, v);
    return {std::move(lower), sub(xu2, gain * xl1)};
}

// ----------------------------------------------------------------------------
// Checks
// ----------------------------------------------------------------------------

ConditionReport check_theorem1(const IntervalSystem& sys, const ObserverRealization& obs, double margin) {
    if (sys.domain != Domain::continuous)
        throw std::invalid_argument("check_theorem1: requires a continuous-time system");
    return check_theorem(sys, obs, margin);
}

ConditionReport check_theorem2(const IntervalSystem& sys, const ObserverRealization& obs, double margin) {
    if (sys.domain != Domain::discrete) throw std::invalid_argument("check_theorem2: requires a discrete-time system");
    return check_theorem(sys, obs, margin);
}

ConditionReport check_conditions(const IntervalSystem& sys, const ObserverRealization& obs, double margin) {
    return sys.domain == Domain::continuous ? check_theorem1(sys, obs, margin) : check_theorem2(sys, obs, margin);
}

ConditionReport check_corollary(const IntervalSystem& sys, const ObserverRealization& obs) {
    if (sys.subsystems() != 1) throw std::invalid_argument("check_corollary: requires exactly one subsystem");
    ConditionReport rep = check_structure(sys, obs, true);
    Tally t{rep};
    const Mat& upper = obs.subsystems.front().ahat_upper;
    const bool continuous = sys.domain == Domain::continuous;

    if (continuous ? is_metzler(upper, kDefaultTol) : is_nonneg(upper, kDefaultTol)) {
        rep.stability_ok = continuous ? metzler_is_hurwitz(upper) : nonneg_is_schur(upper);
        if (!rep.stability_ok) t.violation(continuous ? "(iii) Ahat_upper is not Hurwitz" : "(iii) Ahat_upper is not Schur");
    } else {
        rep.stability_ok = false;
        t.violation(continuous ? "(iii) Ahat_upper is not Metzler; Hurwitz test not applicable"
                               : "(iii) Ahat_upper has negative entries; Schur test not applicable");
    }

    const std::vector<Mat> mats = stability_family(sys, obs);
    const LambdaSearch lp = find_lambda_sweep(mats);
    rep.lp_agrees = lp.feasible() == rep.stability_ok;
    if (lp.feasible()) rep.certificate = lp.certificate;
    if (!rep.stability_ok) rep.penalty += lyapunov_penalty(mats);
    if (!*rep.lp_agrees) rep.notes.push_back("diagnostic: LP certificate and M-matrix test disagree");

    rep.initial_ok = initial_condition(sys, obs, t);
    return rep;
}

// ----------------------------------------------------------------------------
// Gain search
// ----------------------------------------------------------------------------

GainSearchResult search_gain(const IntervalSystem& sys, const GainSearchOptions& opts) {
    if (opts.budget < 1) throw std::invalid_argument("search_gain: budget must be >= 1");
    sys.validate();
    const std::size_t q = sys.reduced();
    const std::size_t p = sys.p;
    if (opts.policy == OmegaPolicy::given && (opts.omega0_lower.size() != q || opts.omega0_upper.size() != q))
        throw InputError(cat("given observer initial states must have length ", q));

    GainSearchResult out;
    auto evaluate = [&](const Mat& gain) {
        ++out.candidates;
        auto [wl, wu] = opts.policy == OmegaPolicy::tight ? tight_omegas(sys, gain)
                                                          : std::pair<Vec, Vec>{opts.omega0_lower, opts.omega0_upper};
        ObserverRealization obs = build_observer(sys, gain, wl, wu);
        ConditionReport rep = check_conditions(sys, obs);
        return std::pair{std::move(obs), std::move(rep)};
    };

    Mat current(q, p);
    auto [obs0, rep0] = evaluate(current);
    out.best_gain = current;
    out.best_penalty = rep0.penalty;
    out.report = rep0;
    if (rep0.passed()) {
        out.observer = std::move(obs0);
        out.best_penalty = 0.0;
        return out;
    }

    std::mt19937_64 rng(opts.seed);
    constexpr double kInitialScale = 0.5;
    double scale = kInitialScale;
    double current_penalty = rep0.penalty;

    while (out.candidates < opts.budget) {
        Mat candidate = current;
        if (unit(rng) < 0.5) {
            // Coordinate move.
            const std::size_t r = static_cast<std::size_t>(unit(rng) * static_cast<double>(q));
            const std::size_t c = static_cast<std::size_t>(unit(rng) * static_cast<double>(p));
            double delta = scale * (unit(rng) + 1e-3) * (unit(rng) < 0.5 ? -1.0 : 1.0);
            if (current(r, c) + delta <= 0.0 && current(r, c) == 0.0) delta = -delta;
            candidate(r, c) = std::max(0.0, current(r, c) + delta);
        } else {
            // Joint move of all entries, for valleys that no single coordinate follows.
            for (std::size_t r = 0; r < q; ++r)
                for (std::size_t c = 0; c < p; ++c)
                    candidate(r, c) = std::max(0.0, current(r, c) + scale * (2.0 * unit(rng) - 1.0));
        }
        auto [obs, rep] = evaluate(candidate);
        if (rep.passed()) {
            out.observer = std::move(obs);
            out.report = std::move(rep);
            out.best_gain = candidate;
            out.best_penalty = 0.0;
            return out;
        }
        if (rep.penalty < current_penalty) {
            current = std::move(candidate);
            current_penalty = rep.penalty;
            scale = std::min(scale * 2.0, 1e3);
            if (current_penalty < out.best_penalty) {
                out.best_penalty = current_penalty;
                out.best_gain = current;
                out.report = std::move(rep);
            }
        } else {
            scale *= 0.5;
            if (scale < 1e-7) scale = kInitialScale;
        }
    }
    return out;
}

DesignResult run_design_procedure(const IntervalSystem& sys, const std::optional<Mat>& gain,
                                  const std::optional<std::pair<Vec, Vec>>& omega, const GainSearchOptions& search) {
    std::vector<std::string> log;
    sys.validate();
    log.push_back(cat("STEP 1: n = ", sys.n, ", p = ", sys.p, " (C = [I_p 0]), N = ", sys.subsystems(), ", ",
                      to_string(sys.domain), " time"));
    for (std::size_t i = 0; i < sys.subsystems(); ++i) {
        (void)partition(sys.a_lower[i], sys.p);
        (void)partition(sys.a_upper[i], sys.p);
    }
    log.push_back(cat("STEP 2: partitioned ", 2 * sys.subsystems(), " interval bound matrices into blocks (",
                      sys.p, " | ", sys.reduced(), ") and x0 bounds into (x^1, x^2)"));
    log.push_back(omega ? "STEP 3: observer initial states supplied by caller"
                        : "STEP 3: observer initial states set tight from the gain (finalized after STEP 4)");

    Mat chosen(sys.reduced(), sys.p);
    if (gain) {
        chosen = *gain;
        log.push_back("STEP 4: observer gain supplied by caller");
    } else {
        GainSearchOptions opts = search;
        if (omega) {
            opts.policy = OmegaPolicy::given;
            opts.omega0_lower = omega->first;
            opts.omega0_upper = omega->second;
        } else {
            opts.policy = OmegaPolicy::tight;
        }
        GainSearchResult found = search_gain(sys, opts);
        if (!found.found())
            throw SynthesisError(cat("no feasible gain after ", found.candidates, " candidates (best penalty ",
                                     found.best_penalty, "): ", found.report.first_violation),
                                 found.best_penalty, found.candidates);
        chosen = found.observer->gain;
        log.push_back(cat("STEP 4: gain found after ", found.candidates, " candidate(s), seed ", opts.seed));
    }

    const auto [wl, wu] = omega ? *omega : tight_omegas(sys, chosen);
    ObserverRealization obs = build_observer(sys, chosen, wl, wu);
    log.push_back("STEP 5: computed Ahat_lower/upper, G_lower/upper, F, Chat, Dhat for every subsystem");
    ConditionReport rep = check_conditions(sys, obs);
    log.push_back(cat("STEP 6: observer pair assembled; conditions (i)-(iv) ", rep.passed() ? "hold" : "FAIL"));
    return {std::move(obs), std::move(rep), std::move(log)};
}

}  // namespace posobs
