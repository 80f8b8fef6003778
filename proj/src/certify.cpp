#include "posobs/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace posobs {

namespace {

constexpr double kPivotEps = 1e-12;

// Dense tableau for: find x >= 0 with A x + s = b, s >= 0, rows with b < 0
// negated and given an artificial variable. Phase 1 minimizes the sum of
// artificials; Bland's rule (lowest index enters, lowest basic index leaves on
// ratio ties) rules out cycling.
class PhaseOneSimplex {
public:
    PhaseOneSimplex(const std::vector<Vec>& a, const Vec& b) : m_(a.size()), nx_(a.front().size()) {
        n_art_ = static_cast<std::size_t>(std::count_if(b.begin(), b.end(), [](double v) { return v < 0.0; }));
        cols_ = nx_ + m_ + n_art_ + 1;
        tab_.assign((m_ + 1) * cols_, 0.0);
        basis_.resize(m_);

        std::size_t art = 0;
        for (std::size_t r = 0; r < m_; ++r) {
            const double sign = b[r] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < nx_; ++j) at(r, j) = sign * a[r][j];
            at(r, nx_ + r) = sign;
            at(r, rhs()) = sign * b[r];
            if (b[r] < 0.0) {
                const std::size_t col = nx_ + m_ + art++;
                at(r, col) = 1.0;
                basis_[r] = col;
            } else {
                basis_[r] = nx_ + r;
            }
        }
        // Reduced costs of the phase-1 objective sum(artificials).
        for (std::size_t r = 0; r < m_; ++r) {
            if (basis_[r] < nx_ + m_) continue;
            for (std::size_t c = 0; c < cols_; ++c)
                if (c < nx_ + m_ || c == rhs()) at(m_, c) -= at(r, c);
        }
    }

    /// Runs to optimality and returns the phase-1 objective value.
    double solve() {
        const std::size_t max_iter = 50 * (m_ + cols_);
        for (std::size_t it = 0; it < max_iter; ++it) {
            std::size_t enter = cols_;
            for (std::size_t c = 0; c + 1 < cols_; ++c)
                if (at(m_, c) < -kPivotEps) {
                    enter = c;
                    break;
                }
            if (enter == cols_) break;

            std::size_t leave = m_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                const double coef = at(r, enter);
                if (coef <= kPivotEps) continue;
                const double ratio = at(r, rhs()) / coef;
                if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis_[r] < basis_[leave])) {
                    best = ratio;
                    leave = r;
                }
            }
            if (leave == m_) break;  // unbounded direction; cannot happen for phase 1
            pivot(leave, enter);
        }
        return -at(m_, rhs());
    }

    [[nodiscard]] Vec primal() const {
        Vec x(nx_, 0.0);
        for (std::size_t r = 0; r < m_; ++r)
            if (basis_[r] < nx_) x[basis_[r]] = std::max(0.0, tab_[r * cols_ + rhs()]);
        return x;
    }

private:
    double& at(std::size_t r, std::size_t c) { return tab_[r * cols_ + c]; }
    [[nodiscard]] std::size_t rhs() const { return cols_ - 1; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        for (std::size_t c = 0; c < cols_; ++c) at(pr, c) *= inv;
        at(pr, pc) = 1.0;
        for (std::size_t r = 0; r <= m_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < cols_; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0;
        }
        basis_[pr] = pc;
    }

    std::size_t m_;
    std::size_t nx_;
    std::size_t n_art_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> tab_;
    std::vector<std::size_t> basis_;
};

std::size_t validate(std::span<const Mat> mats) {
    if (mats.empty()) throw std::invalid_argument("find_lambda: empty matrix family");
    const std::size_t n = mats.front().rows();
    for (const Mat& m : mats)
        if (!m.square() || m.rows() != n) throw std::invalid_argument("find_lambda: matrices must be square of equal size");
    return n;
}

// Smallest slack of the two inequality families at lambda.
double attained_margin(std::span<const Mat> mats, const Vec& lambda, Vec* residuals) {
    double margin = *std::min_element(lambda.begin(), lambda.end());
    if (residuals) residuals->clear();
    for (const Mat& m : mats) {
        const Vec v = m.transpose() * lambda;
        const double worst = *std::max_element(v.begin(), v.end());
        if (residuals) residuals->push_back(worst);
        margin = std::min(margin, -worst);
    }
    return margin;
}

}  // namespace

LambdaSearch find_lambda(std::span<const Mat> mats, double margin) {
    const std::size_t n = validate(mats);
    if (!(margin > 0.0)) throw std::invalid_argument("find_lambda: margin must be positive");

    LambdaSearch out;
    out.margin = margin;
    if (margin > 1.0) {
        out.infeasibility = static_cast<double>(n) * (margin - 1.0);
        return out;
    }

    // lambda = margin * 1 + u, u >= 0.
    std::vector<Vec> a;
    Vec b;
    for (std::size_t j = 0; j < n; ++j) {
        Vec row(n, 0.0);
        row[j] = 1.0;
        a.push_back(std::move(row));
        b.push_back(1.0 - margin);
    }
    for (const Mat& m : mats) {
        for (std::size_t r = 0; r < n; ++r) {
            Vec row(n);
            double colsum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                row[j] = m(j, r);
                colsum += m(j, r);
            }
            a.push_back(std::move(row));
            b.push_back(-margin - margin * colsum);
        }
    }

    PhaseOneSimplex lp(a, b);
    const double objective = lp.solve();
    out.infeasibility = std::max(0.0, objective);

    double scale = 1.0;
    for (double v : b) scale = std::max(scale, std::abs(v));
    if (objective > 1e-11 * scale) return out;

    Vec lambda = lp.primal();
    for (double& v : lambda) v += margin;
    const double top = *std::max_element(lambda.begin(), lambda.end());
    for (double& v : lambda) v /= top;

    Certificate cert;
    const double achieved = attained_margin(mats, lambda, &cert.residuals);
    if (!(achieved >= 0.5 * margin)) {
        out.infeasibility = std::max(out.infeasibility, margin - achieved);
        return out;
    }
    cert.lambda = std::move(lambda);
    cert.margin = std::min(margin, achieved);
    out.infeasibility = 0.0;
    out.certificate = std::move(cert);
    return out;
}

LambdaSearch find_lambda_sweep(std::span<const Mat> mats, double margin, double min_margin) {
    if (!(min_margin > 0.0) || min_margin > margin)
        throw std::invalid_argument("find_lambda_sweep: need 0 < min_margin <= margin");
    LambdaSearch last;
    for (double m = margin;; m /= 10.0) {
        if (m < min_margin * (1.0 - 1e-9)) m = min_margin;
        last = find_lambda(mats, m);
        if (last.feasible() || m <= min_margin) return last;
    }
}

bool check_lambda(std::span<const Mat> mats, const Certificate& cert) {
    if (mats.empty() || cert.lambda.size() != mats.front().rows()) return false;
    for (double v : cert.lambda)
        if (!(v >= cert.margin)) return false;
    for (const Mat& m : mats) {
        if (!m.square() || m.rows() != cert.lambda.size()) return false;
        const Vec v = m.transpose() * cert.lambda;
        for (double x : v)
            if (!(x <= -cert.margin)) return false;
    }
    return true;
}

}  // namespace posobs
