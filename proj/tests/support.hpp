#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "posobs/matcore.hpp"
#include "posobs/sim.hpp"
#include "posobs/synth.hpp"

namespace testsupport {

using posobs::Mat;
using posobs::Vec;

struct Rng {
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double unit() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(unit() * static_cast<double>(hi - lo + 1));
    }
    std::mt19937_64 gen;
};

/// Entries uniform in [lo, hi], off-diagonals clamped at 0.
inline Mat random_metzler(Rng& rng, std::size_t n, double lo = -30.0, double hi = 10.0) {
    Mat m(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double v = rng.uniform(lo, hi);
            m(r, c) = r == c ? v : std::max(0.0, v);
        }
    return m;
}

inline Mat random_nonneg(Rng& rng, std::size_t rows, std::size_t cols, double hi) {
    Mat m(rows, cols);
    for (double& v : m.entries()) v = rng.uniform(0.0, hi);
    return m;
}

inline Mat random_dense(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    Mat m(rows, cols);
    for (double& v : m.entries()) v = rng.uniform(lo, hi);
    return m;
}

/// Plain Taylor sum, no scaling. Only for small ||m t||.
inline Mat taylor_expm(const Mat& m, double t, int terms = 60) {
    const std::size_t n = m.rows();
    Mat sum = Mat::identity(n);
    Mat term = Mat::identity(n);
    for (int k = 1; k <= terms; ++k) {
        term = (t / k) * (term * m);
        sum += term;
    }
    return sum;
}

/// Spectral radius of a nonnegative matrix from ||m^(2^k)||^(1/2^k),
/// renormalizing each squaring to stay in range.
inline double spectral_radius_by_squaring(const Mat& m, int rounds = 40) {
    Mat p = m;
    double log_scale = 0.0;  // log of the factor divided out so far, per unit power
    double power = 1.0;
    for (int k = 0; k < rounds; ++k) {
        const double s = p.max_abs();
        if (s == 0.0) return 0.0;
        p = (1.0 / s) * p;
        log_scale += std::log(s) / power;
        p = p * p;
        power *= 2.0;
    }
    const double s = p.max_abs();
    if (s == 0.0) return 0.0;
    return std::exp(log_scale + std::log(s) / power);
}

/// Random interval system in the given domain with diagonally dominant
/// bounds, so that the observer conditions usually hold.
inline posobs::IntervalSystem random_interval_system(Rng& rng, posobs::Domain domain) {
    const std::size_t n = rng.index(2, 5);
    const std::size_t p = rng.index(1, n - 1);
    const std::size_t count = rng.index(1, 3);
    std::vector<Mat> lo;
    std::vector<Mat> up;
    for (std::size_t i = 0; i < count; ++i) {
        Mat a(n, n);
        Mat w(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) {
                if (domain == posobs::Domain::continuous) {
                    a(r, c) = r == c ? rng.uniform(-30.0, -12.0) : rng.uniform(0.0, 2.0);
                    w(r, c) = rng.uniform(0.0, 1.0);
                } else {
                    a(r, c) = rng.uniform(0.0, 0.08);
                    w(r, c) = rng.uniform(0.0, 0.08);
                }
            }
        up.push_back(a + w);
        lo.push_back(std::move(a));
    }
    Vec x0l(n);
    Vec x0u(n);
    for (std::size_t k = 0; k < n; ++k) {
        x0l[k] = rng.uniform(0.0, 5.0);
        x0u[k] = x0l[k] + rng.uniform(0.0, 4.0);
    }
    return posobs::make_interval_system(domain, p, std::move(lo), std::move(up), std::move(x0l), std::move(x0u));
}

struct Scenario {
    posobs::IntervalSystem system;
    posobs::ObserverRealization observer;
    posobs::TrueSystem truth;
};

/// Random system, gain and admissible initial observer states, kept only if
/// the condition check passes. Truth drawn uniformly from the intervals.
inline Scenario random_passing_scenario(Rng& rng, posobs::Domain domain) {
    for (;;) {
        posobs::IntervalSystem sys = random_interval_system(rng, domain);
        const std::size_t q = sys.reduced();
        Mat gain(q, sys.p);
        if (rng.unit() < 0.5)
            for (double& v : gain.entries()) v = rng.uniform(0.0, domain == posobs::Domain::continuous ? 0.2 : 0.05);
        const auto [tight_lo, tight_up] = posobs::tight_omegas(sys, gain);
        Vec wl(q);
        Vec wu(q);
        for (std::size_t k = 0; k < q; ++k) {
            wl[k] = tight_lo[k] * rng.unit();
            wu[k] = tight_up[k] + rng.uniform(0.0, 2.0);
        }
        posobs::ObserverRealization obs = posobs::build_observer(sys, gain, wl, wu);
        if (!posobs::check_conditions(sys, obs).passed()) continue;
        posobs::TrueSystem truth = posobs::sample_truth(sys, rng.gen());
        return {std::move(sys), std::move(obs), std::move(truth)};
    }
}

}  // namespace testsupport
