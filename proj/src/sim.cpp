#include "posobs/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

namespace posobs {

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int draw_index(std::mt19937_64& rng, std::size_t n, int previous) {
    if (n == 1) return 1;
    if (previous == 0) return 1 + static_cast<int>(unit(rng) * static_cast<double>(n));
    // Uniform over the n-1 indices different from `previous`.
    int k = 1 + static_cast<int>(unit(rng) * static_cast<double>(n - 1));
    return k >= previous ? k + 1 : k;
}

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

// Block generator of the coupled system z = [x; wl; wu; we_l; we_u].
Mat coupled_generator(std::size_t n, std::size_t p, const Mat& a, const SubsystemObserver& interval,
                      const SubsystemObserver& exact) {
    const std::size_t q = n - p;
    Mat z(n + 4 * q, n + 4 * q);
    z.set_block(0, 0, a);
    const Mat* dyn[4] = {&interval.ahat_lower, &interval.ahat_upper, &exact.ahat_lower, &exact.ahat_lower};
    const Mat* inj[4] = {&interval.g_lower, &interval.g_upper, &exact.g_lower, &exact.g_lower};
    for (std::size_t b = 0; b < 4; ++b) {
        const std::size_t row = n + b * q;
        z.set_block(row, row, *dyn[b]);
        z.set_block(row, 0, *inj[b]);
    }
    return z;
}

// Allocates series and records sample k from the coupled state.
class TraceBuilder {
public:
    TraceBuilder(Domain d, std::size_t n, std::size_t p, const ObserverRealization& obs) : obs_(obs) {
        trace_.domain = d;
        trace_.n = n;
        trace_.p = p;
    }

    void record(double t, int sigma, std::span<const double> z) {
        const std::size_t n = trace_.n;
        const std::size_t p = trace_.p;
        const std::size_t q = n - p;
        auto part = [&](std::size_t off, std::size_t len) { return Vec(z.begin() + off, z.begin() + off + len); };
        Vec x = part(0, n);
        Vec y = part(0, p);
        Vec wl = part(n, q);
        Vec wu = part(n + q, q);
        Vec el = part(n + 2 * q, q);
        Vec eu = part(n + 3 * q, q);
        Vec xl = add(obs_.chat * wl, obs_.dhat * y);
        Vec xu = add(obs_.chat * wu, obs_.dhat * y);
        const Vec fx = obs_.f * x;

        trace_.times.push_back(t);
        trace_.sigma.push_back(sigma);
        trace_.xi.push_back(sub(xu, xl));
        trace_.eps_lower.push_back(sub(fx, el));
        trace_.eps_upper.push_back(sub(eu, fx));
        trace_.x.push_back(std::move(x));
        trace_.y.push_back(std::move(y));
        trace_.omega_lower.push_back(std::move(wl));
        trace_.omega_upper.push_back(std::move(wu));
        trace_.omega_exact_lower.push_back(std::move(el));
        trace_.omega_exact_upper.push_back(std::move(eu));
        trace_.xhat_lower.push_back(std::move(xl));
        trace_.xhat_upper.push_back(std::move(xu));
    }

    SimulationTrace take() { return std::move(trace_); }

private:
    const ObserverRealization& obs_;
    SimulationTrace trace_;
};

struct Prepared {
    std::vector<Mat> generators;
    Vec z0;
};

Prepared prepare(const IntervalSystem& sys, const TrueSystem& truth, const ObserverRealization& obs) {
    validate_truth(sys, truth);
    const std::size_t n = sys.n;
    const std::size_t q = sys.reduced();
    if (obs.subsystems.size() != sys.subsystems() || obs.gain.rows() != q || obs.gain.cols() != sys.p ||
        obs.omega0_lower.size() != q || obs.omega0_upper.size() != q)
        throw InputError("observer realization does not match the system dimensions");

    Prepared out;
    for (std::size_t i = 0; i < sys.subsystems(); ++i) {
        const SubsystemObserver exact = observer_blocks(truth.a[i], truth.a[i], obs.gain, sys.p);
        out.generators.push_back(coupled_generator(n, sys.p, truth.a[i], obs.subsystems[i], exact));
    }
    out.z0 = truth.x0;
    for (const Vec* w : {&obs.omega0_lower, &obs.omega0_upper, &obs.omega0_lower, &obs.omega0_upper})
        out.z0.insert(out.z0.end(), w->begin(), w->end());
    return out;
}

void require_finite(std::span<const double> z, double t) {
    for (double v : z)
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "simulation produced a non-finite state at t = " << t;
            throw NumericRangeError(os.str());
        }
}

void update_layer(LayerStats& s, double violation, double tol, std::size_t k, std::size_t c) {
    if (violation <= tol) return;
    ++s.violations;
    if (violation > s.worst) {
        s.worst = violation;
        s.sample = k;
        s.component = c;
    }
}

}  // namespace

// ----------------------------------------------------------------------------
// Truth
// ----------------------------------------------------------------------------

void validate_truth(const IntervalSystem& sys, const TrueSystem& truth) {
    if (truth.a.size() != sys.subsystems())
        throw InputError("truth must provide one matrix per subsystem");
    if (truth.x0.size() != sys.n) throw InputError("truth x0 has the wrong length");
    for (std::size_t i = 0; i < truth.a.size(); ++i) {
        const Mat& a = truth.a[i];
        if (a.rows() != sys.n || a.cols() != sys.n) throw InputError("truth A matrices must be n x n");
        for (std::size_t r = 0; r < sys.n; ++r)
            for (std::size_t c = 0; c < sys.n; ++c)
                if (!(a(r, c) >= sys.a_lower[i](r, c) && a(r, c) <= sys.a_upper[i](r, c))) {
                    std::ostringstream os;
                    os << "truth A[" << i + 1 << "](" << r + 1 << "," << c + 1 << ") = " << a(r, c)
                       << " outside [" << sys.a_lower[i](r, c) << ", " << sys.a_upper[i](r, c) << "]";
                    throw InputError(os.str());
                }
    }
    for (std::size_t k = 0; k < sys.n; ++k)
        if (!(truth.x0[k] >= sys.x0_lower[k] && truth.x0[k] <= sys.x0_upper[k])) {
            std::ostringstream os;
            os << "truth x0[" << k + 1 << "] = " << truth.x0[k] << " outside [" << sys.x0_lower[k] << ", "
               << sys.x0_upper[k] << "]";
            throw InputError(os.str());
        }
}

TrueSystem sample_truth(const IntervalSystem& sys, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    TrueSystem t;
    for (std::size_t i = 0; i < sys.subsystems(); ++i) {
        Mat a = sys.a_lower[i];
        for (std::size_t r = 0; r < sys.n; ++r)
            for (std::size_t c = 0; c < sys.n; ++c) {
                const double lo = sys.a_lower[i](r, c);
                const double hi = sys.a_upper[i](r, c);
                a(r, c) = std::min(hi, lo + (hi - lo) * unit(rng));
            }
        t.a.push_back(std::move(a));
    }
    for (std::size_t k = 0; k < sys.n; ++k) {
        const double lo = sys.x0_lower[k];
        const double hi = sys.x0_upper[k];
        t.x0.push_back(std::min(hi, lo + (hi - lo) * unit(rng)));
    }
    return t;
}

// ----------------------------------------------------------------------------
// Switching
// ----------------------------------------------------------------------------

int SwitchingSignal::index_at(double t) const {
    auto it = std::upper_bound(switch_times.begin(), switch_times.end(), t);
    const std::size_t k = it == switch_times.begin() ? 0 : static_cast<std::size_t>(it - switch_times.begin()) - 1;
    return indices[k];
}

void SwitchingSignal::validate(std::size_t n_subsystems) const {
    if (switch_times.empty() || switch_times.size() != indices.size())
        throw std::invalid_argument("switching signal: times and indices must be nonempty and of equal length");
    if (switch_times.front() != 0.0) throw std::invalid_argument("switching signal must start at 0");
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] < 1 || static_cast<std::size_t>(indices[k]) > n_subsystems)
            throw std::invalid_argument("switching signal: subsystem index out of range");
        const double end = k + 1 < switch_times.size() ? switch_times[k + 1] : horizon;
        if (!(end > switch_times[k])) throw std::invalid_argument("switching signal: times must increase");
        // The horizon truncates the last interval; only completed dwells are checked.
        if (k + 1 < switch_times.size() && end - switch_times[k] < min_dwell * (1.0 - 1e-12))
            throw std::invalid_argument("switching signal: interval shorter than the dwell time");
    }
}

SwitchingSignal make_switching_signal(std::size_t n_subsystems, double horizon, double min_dwell, std::uint64_t seed) {
    if (n_subsystems < 1) throw std::invalid_argument("make_switching_signal: need at least one subsystem");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("make_switching_signal: horizon must be > 0");
    if (!(min_dwell >= 0.0) || !std::isfinite(min_dwell))
        throw std::invalid_argument("make_switching_signal: min_dwell must be >= 0");

    std::mt19937_64 rng(seed);
    SwitchingSignal sig;
    sig.seed = seed;
    sig.min_dwell = min_dwell;
    sig.horizon = horizon;

    const double lo = min_dwell;
    const double hi = min_dwell > 0.0 ? 2.0 * min_dwell : horizon / 10.0;
    double t = 0.0;
    int prev = 0;
    while (true) {
        prev = draw_index(rng, n_subsystems, prev);
        sig.switch_times.push_back(t);
        sig.indices.push_back(prev);
        if (n_subsystems == 1 || min_dwell >= horizon) break;
        double len = lo + (hi - lo) * unit(rng);
        if (len <= 0.0) len = hi;
        const double next = t + len;
        if (horizon - next < std::max(min_dwell, 1e-12 * horizon)) break;
        t = next;
    }
    return sig;
}

SwitchingSignal make_discrete_switching_signal(std::size_t n_subsystems, std::size_t steps, std::size_t min_dwell_steps,
                                               std::uint64_t seed) {
    if (n_subsystems < 1) throw std::invalid_argument("make_discrete_switching_signal: need at least one subsystem");
    if (steps < 1) throw std::invalid_argument("make_discrete_switching_signal: steps must be >= 1");
    const std::size_t dwell = std::max<std::size_t>(1, min_dwell_steps);

    std::mt19937_64 rng(seed);
    SwitchingSignal sig;
    sig.seed = seed;
    sig.min_dwell = static_cast<double>(dwell);
    sig.horizon = static_cast<double>(steps);

    std::size_t k = 0;
    int prev = 0;
    while (true) {
        prev = draw_index(rng, n_subsystems, prev);
        sig.switch_times.push_back(static_cast<double>(k));
        sig.indices.push_back(prev);
        if (n_subsystems == 1 || dwell >= steps) break;
        const std::size_t len = dwell + static_cast<std::size_t>(unit(rng) * static_cast<double>(dwell + 1));
        const std::size_t next = k + len;
        if (next + dwell > steps) break;
        k = next;
    }
    return sig;
}

// ----------------------------------------------------------------------------
// Simulation
// ----------------------------------------------------------------------------

Vec SimulationTrace::state(std::size_t k) const {
    Vec z = x[k];
    for (const auto* s : {&omega_lower, &omega_upper, &omega_exact_lower, &omega_exact_upper})
        z.insert(z.end(), (*s)[k].begin(), (*s)[k].end());
    return z;
}

std::vector<double> simulation_grid(const SwitchingSignal& sig, double step, double horizon) {
    std::vector<double> grid;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * step;
        if (t >= horizon) break;
        grid.push_back(t);
    }
    for (double ts : sig.switch_times)
        if (ts < horizon) grid.push_back(ts);
    grid.push_back(horizon);
    std::sort(grid.begin(), grid.end());
    const double merge = 1e-9 * step;
    std::vector<double> out;
    for (double t : grid) {
        if (!out.empty() && t - out.back() <= merge) {
            // Keep switch times and the horizon exact over nearby multiples of step.
            const bool special = t == horizon || std::binary_search(sig.switch_times.begin(), sig.switch_times.end(), t);
            if (special) out.back() = t;
            continue;
        }
        out.push_back(t);
    }
    return out;
}

SimulationTrace simulate_continuous(const IntervalSystem& sys, const TrueSystem& truth, const ObserverRealization& obs,
                                    const SwitchingSignal& sig, double step, double horizon) {
    if (sys.domain != Domain::continuous) throw std::invalid_argument("simulate_continuous: system is discrete-time");
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("simulate_continuous: step must be > 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("simulate_continuous: horizon must be > 0");
    sig.validate(sys.subsystems());
    const Prepared prep = prepare(sys, truth, obs);
    const std::vector<double> grid = simulation_grid(sig, step, horizon);

    TraceBuilder tb(Domain::continuous, sys.n, sys.p, obs);
    Vec z = prep.z0;
    const std::size_t dim = z.size();
    tb.record(grid.front(), sig.index_at(grid.front()), z);
    Vec tmp(dim);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double t0 = grid[k];
        const double h = grid[k + 1] - t0;
        const Mat& g = prep.generators[static_cast<std::size_t>(sig.index_at(t0) - 1)];

        const Vec k1 = g * z;
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
        const Vec k2 = g * tmp;
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
        const Vec k3 = g * tmp;
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = z[i] + h * k3[i];
        const Vec k4 = g * tmp;
        for (std::size_t i = 0; i < dim; ++i) z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        require_finite(z, grid[k + 1]);
        tb.record(grid[k + 1], sig.index_at(grid[k + 1]), z);
    }
    return tb.take();
}

SimulationTrace simulate_discrete(const IntervalSystem& sys, const TrueSystem& truth, const ObserverRealization& obs,
                                  const SwitchingSignal& sig, std::size_t horizon_steps) {
    if (sys.domain != Domain::discrete) throw std::invalid_argument("simulate_discrete: system is continuous-time");
    if (horizon_steps < 1) throw std::invalid_argument("simulate_discrete: horizon_steps must be >= 1");
    sig.validate(sys.subsystems());
    const Prepared prep = prepare(sys, truth, obs);

    TraceBuilder tb(Domain::discrete, sys.n, sys.p, obs);
    Vec z = prep.z0;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k);
        const int sigma = sig.index_at(t);
        tb.record(t, sigma, z);
        if (k == horizon_steps) break;
        z = prep.generators[static_cast<std::size_t>(sigma - 1)] * z;
        require_finite(z, static_cast<double>(k + 1));
    }
    return tb.take();
}

// ----------------------------------------------------------------------------
// Verification and export
// ----------------------------------------------------------------------------

BracketReport verify_bracket(const SimulationTrace& trace, double tol) {
    BracketReport rep;
    rep.outputs_exact = true;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const Vec& x = trace.x[k];
        const Vec& xl = trace.xhat_lower[k];
        const Vec& xu = trace.xhat_upper[k];
        for (std::size_t c = 0; c < x.size(); ++c) {
            update_layer(rep.lower_nonneg, -xl[c], tol, k, c);
            update_layer(rep.lower_below, xl[c] - x[c], tol, k, c);
            update_layer(rep.upper_above, x[c] - xu[c], tol, k, c);
        }
        for (std::size_t c = 0; c < trace.p; ++c)
            if (xl[c] != trace.y[k][c] || xu[c] != trace.y[k][c]) rep.outputs_exact = false;
        rep.sup_xi = std::max(rep.sup_xi, norm2(trace.xi[k]));
    }
    if (trace.size() > 0) {
        rep.xi_start = norm2(trace.xi.front());
        rep.xi_end = norm2(trace.xi.back());
    }
    return rep;
}

std::size_t count_order_chain_violations(const SimulationTrace& trace, double tol) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const Vec* chain[4] = {&trace.omega_lower[k], &trace.omega_exact_lower[k], &trace.omega_exact_upper[k],
                               &trace.omega_upper[k]};
        for (std::size_t j = 0; j + 1 < 4; ++j)
            for (std::size_t c = 0; c < chain[j]->size(); ++c)
                if ((*chain[j])[c] > (*chain[j + 1])[c] + tol) ++count;
    }
    return count;
}

double trace_sup_distance(const SimulationTrace& a, const SimulationTrace& b) {
    double worst = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a.times[i];
        while (j < b.size() && b.times[j] < t - 1e-12) ++j;
        if (j == b.size()) break;
        if (std::abs(b.times[j] - t) > 1e-12) continue;
        worst = std::max(worst, max_abs(sub(a.state(i), b.state(j))));
    }
    return worst;
}

void write_trace_csv(std::ostream& os, const SimulationTrace& trace) {
    const std::size_t n = trace.n;
    os << "t";
    for (const char* prefix : {"x", "xhatl", "xhatu", "xi"})
        for (std::size_t c = 1; c <= n; ++c) os << ',' << prefix << c;
    os << ",sigma\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
        os << fmt_double(trace.times[k]);
        for (const auto* s : {&trace.x, &trace.xhat_lower, &trace.xhat_upper, &trace.xi})
            for (double v : (*s)[k]) os << ',' << fmt_double(v);
        os << ',' << trace.sigma[k] << '\n';
    }
}

void print_bracket_report(std::ostream& os, const BracketReport& rep, double tol) {
    auto layer = [&](const char* name, const LayerStats& s) {
        os << "  " << name << ": " << s.violations << " violation(s)";
        if (s.violations) os << ", worst " << s.worst << " at sample " << s.sample << " component " << s.component + 1;
        os << '\n';
    };
    os << "bracket check (tol " << tol << ")\n";
    layer("0 <= xhat_lower    ", rep.lower_nonneg);
    layer("xhat_lower <= x    ", rep.lower_below);
    layer("x <= xhat_upper    ", rep.upper_above);
    os << "  sup |xi|           : " << rep.sup_xi << '\n';
    os << "  |xi| start -> end  : " << rep.xi_start << " -> " << rep.xi_end << '\n';
    os << "  outputs exact      : " << (rep.outputs_exact ? "yes" : "no") << '\n';
    os << "  total violations   : " << rep.total_violations() << '\n';
}

}  // namespace posobs
