#include "posobs/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace posobs {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream os;
        os << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols();
        throw std::invalid_argument(os.str());
    }
}

// Pivots of unpivoted Gaussian elimination. Stops after the first pivot <= tol.
Vec elimination_pivots(Mat a, double tol) {
    const std::size_t n = a.rows();
    Vec piv;
    piv.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double d = a(k, k);
        piv.push_back(d);
        if (!(d > tol)) break;
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / d;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return piv;
}

bool all_pivots_positive(const Mat& a, double tol) {
    const Vec piv = elimination_pivots(a, tol);
    return piv.size() == a.rows() && std::all_of(piv.begin(), piv.end(), [tol](double d) { return d > tol; });
}

}  // namespace

// ----------------------------------------------------------------------------
// Mat
// ----------------------------------------------------------------------------

Mat::Mat(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    require(rows >= 1 && cols >= 1, "Mat: rows and cols must be >= 1");
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) : rows_(rows.size()), cols_(0) {
    require(rows_ >= 1, "Mat: at least one row required");
    cols_ = rows.begin()->size();
    require(cols_ >= 1, "Mat: at least one column required");
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        require(r.size() == cols_, "Mat: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Mat Mat::from_rows(const std::vector<Vec>& rows) {
    require(!rows.empty() && !rows.front().empty(), "Mat: empty row list");
    Mat m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r].size() == m.cols_, "Mat: ragged row list");
        std::copy(rows[r].begin(), rows[r].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(r * m.cols_));
    }
    return m;
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::diag(const Vec& d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

std::vector<Vec> Mat::to_rows() const {
    std::vector<Vec> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        out[r].assign(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                      data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
    return out;
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Mat Mat::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    require(r0 + nr <= rows_ && c0 + nc <= cols_, "Mat::block: out of range");
    Mat b(nr, nc);
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t c = 0; c < nc; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
    return b;
}

void Mat::set_block(std::size_t r0, std::size_t c0, const Mat& b) {
    require(r0 + b.rows() <= rows_ && c0 + b.cols() <= cols_, "Mat::set_block: out of range");
    for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c) (*this)(r0 + r, c0 + c) = b(r, c);
}

double Mat::max_abs() const { return posobs::max_abs(data_); }

double Mat::norm1() const {
    double best = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < rows_; ++r) s += std::abs((*this)(r, c));
        best = std::max(best, s);
    }
    return best;
}

Mat& Mat::operator+=(const Mat& o) {
    require_same_shape(*this, o, "operator+");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Mat& Mat::operator-=(const Mat& o) {
    require_same_shape(*this, o, "operator-");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Mat& Mat::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("operator*: inner dimension mismatch");
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vec operator*(const Mat& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw std::invalid_argument("operator*: matrix-vector dimension mismatch");
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Vec add(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "add: length mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vec sub(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "sub: length mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool leq(const Mat& a, const Mat& b, double tol) {
    require_same_shape(a, b, "leq");
    return leq(a.entries(), b.entries(), tol);
}

bool leq(std::span<const double> a, std::span<const double> b, double tol) {
    require(a.size() == b.size(), "leq: length mismatch");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] <= b[i] + tol)) return false;
    return true;
}

// ----------------------------------------------------------------------------
// IntervalMat / partition
// ----------------------------------------------------------------------------

IntervalMat::IntervalMat(Mat lo, Mat up) : lower(std::move(lo)), upper(std::move(up)) {
    require_same_shape(lower, upper, "IntervalMat");
    require(leq(lower, upper), "IntervalMat: lower must not exceed upper");
}

bool IntervalMat::contains(const Mat& m, double tol) const { return leq(lower, m, tol) && leq(m, upper, tol); }

PartitionedBlocks partition(const Mat& m, std::size_t p) {
    require(m.square(), "partition: matrix must be square");
    const std::size_t n = m.rows();
    if (p < 1 || p >= n) throw std::invalid_argument("invalid partition: need 1 <= p < n");
    return {m.block(0, 0, p, p), m.block(0, p, p, n - p), m.block(p, 0, n - p, p), m.block(p, p, n - p, n - p)};
}

Mat assemble(const PartitionedBlocks& b) {
    const std::size_t p = b.a11.rows();
    const std::size_t q = b.a22.rows();
    require(b.a11.square() && b.a22.square(), "assemble: diagonal blocks must be square");
    require(b.a12.rows() == p && b.a12.cols() == q && b.a21.rows() == q && b.a21.cols() == p,
            "assemble: inconsistent block shapes");
    Mat m(p + q, p + q);
    m.set_block(0, 0, b.a11);
    m.set_block(0, p, b.a12);
    m.set_block(p, 0, b.a21);
    m.set_block(p, p, b.a22);
    return m;
}

// ----------------------------------------------------------------------------
// Predicates
// ----------------------------------------------------------------------------

bool is_nonneg(const Mat& m, double tol) { return is_nonneg(m.entries(), tol); }

bool is_nonneg(std::span<const double> v, double tol) {
    return std::all_of(v.begin(), v.end(), [tol](double x) { return x >= -tol; });
}

bool is_metzler(const Mat& m, double tol) {
    require(m.square(), "is_metzler: matrix must be square");
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (i != j && !(m(i, j) >= -tol)) return false;
    return true;
}

Vec leading_principal_minors(const Mat& m) {
    require(m.square(), "leading_principal_minors: matrix must be square");
    const Vec piv = elimination_pivots(m, 0.0);
    Vec minors;
    double prod = 1.0;
    for (double d : piv) {
        prod *= d;
        minors.push_back(prod);
    }
    return minors;
}

bool metzler_is_hurwitz(const Mat& m, double tol) {
    if (!is_metzler(m, tol)) throw std::invalid_argument("metzler_is_hurwitz: input is not Metzler");
    return all_pivots_positive(-1.0 * m, tol);
}

bool nonneg_is_schur(const Mat& m, double tol) {
    require(m.square(), "nonneg_is_schur: matrix must be square");
    if (!is_nonneg(m, tol)) throw std::invalid_argument("nonneg_is_schur: input has negative entries");
    return all_pivots_positive(Mat::identity(m.rows()) - m, tol);
}

// ----------------------------------------------------------------------------
// expm
// ----------------------------------------------------------------------------

Mat expm(const Mat& m, double t) {
    require(m.square(), "expm: matrix must be square");
    if (!std::isfinite(t)) throw NumericRangeError("expm: non-finite time");
    const std::size_t n = m.rows();
    if (t == 0.0) return Mat::identity(n);

    Mat a = t * m;
    double shift = 0.0;
    if (t > 0.0 && is_metzler(m)) {
        shift = a(0, 0);
        for (std::size_t i = 1; i < n; ++i) shift = std::min(shift, a(i, i));
    } else {
        for (std::size_t i = 0; i < n; ++i) shift += a(i, i);
        shift /= static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) a(i, i) -= shift;

    int squarings = 0;
    const double nrm = a.norm1();
    if (!std::isfinite(nrm)) throw NumericRangeError("expm: non-finite input");
    if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    if (squarings > 1000) throw NumericRangeError("expm: argument norm out of range");
    a *= std::ldexp(1.0, -squarings);

    Mat e = Mat::identity(n);
    Mat term = Mat::identity(n);
    for (int k = 1; k <= 40; ++k) {
        term = (1.0 / k) * (term * a);
        e += term;
        if (term.norm1() <= 1e-18 * e.norm1()) break;
    }
    // Fold the shift back in at the scaled level so large shifts do not overflow
    // before the squarings bring them down.
    e *= std::exp(shift * std::ldexp(1.0, -squarings));
    for (int s = 0; s < squarings; ++s) e = e * e;

    for (double v : e.entries())
        if (!std::isfinite(v)) throw NumericRangeError("expm: result overflow");
    return e;
}

}  // namespace posobs
