#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace posobs {

// ============================================================================
// Errors
// ============================================================================

/// Raised when a computation leaves the representable range (overflow, NaN).
class NumericRangeError : public std::runtime_error {
public:
    explicit NumericRangeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Default tolerance for strict/non-strict sign tests throughout the library.
inline constexpr double kDefaultTol = 1e-9;

using Vec = std::vector<double>;

// ============================================================================
// Dense row-major matrix
// ============================================================================

class Mat {
public:
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat from_rows(const std::vector<Vec>& rows);
    static Mat identity(std::size_t n);
    static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }
    static Mat diag(const Vec& d);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<const double> entries() const { return data_; }
    [[nodiscard]] std::span<double> entries() { return data_; }
    [[nodiscard]] std::vector<Vec> to_rows() const;

    [[nodiscard]] Mat transpose() const;
    [[nodiscard]] Mat block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const Mat& b);

    [[nodiscard]] double max_abs() const;
    /// Induced 1-norm (max column sum).
    [[nodiscard]] double norm1() const;

    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);
    Mat& operator*=(double s);

    friend bool operator==(const Mat& a, const Mat& b) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

[[nodiscard]] Mat operator+(Mat a, const Mat& b);
[[nodiscard]] Mat operator-(Mat a, const Mat& b);
[[nodiscard]] Mat operator*(const Mat& a, const Mat& b);
[[nodiscard]] Mat operator*(double s, Mat a);
[[nodiscard]] Vec operator*(const Mat& a, std::span<const double> x);

[[nodiscard]] Vec add(std::span<const double> a, std::span<const double> b);
[[nodiscard]] Vec sub(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double norm2(std::span<const double> v);
[[nodiscard]] double max_abs(std::span<const double> v);

/// Elementwise a <= b + tol.
[[nodiscard]] bool leq(const Mat& a, const Mat& b, double tol = 0.0);
[[nodiscard]] bool leq(std::span<const double> a, std::span<const double> b, double tol = 0.0);

// ============================================================================
// Interval matrix and block partition
// ============================================================================

struct IntervalMat {
    Mat lower;
    Mat upper;

    /// Throws std::invalid_argument unless dimensions agree and lower <= upper.
    IntervalMat(Mat lo, Mat up);

    [[nodiscard]] bool contains(const Mat& m, double tol = 0.0) const;
};

/// The 2x2 block split of an n x n matrix at index p:
///   [ a11 (p x p)      a12 (p x n-p)   ]
///   [ a21 (n-p x p)    a22 (n-p x n-p) ]
struct PartitionedBlocks {
    Mat a11;
    Mat a12;
    Mat a21;
    Mat a22;
};

[[nodiscard]] PartitionedBlocks partition(const Mat& m, std::size_t p);
[[nodiscard]] Mat assemble(const PartitionedBlocks& b);

// ============================================================================
// Predicates
// ============================================================================

[[nodiscard]] bool is_nonneg(const Mat& m, double tol = 0.0);
[[nodiscard]] bool is_nonneg(std::span<const double> v, double tol = 0.0);

/// Off-diagonal entries >= -tol. Throws std::invalid_argument on non-square input.
[[nodiscard]] bool is_metzler(const Mat& m, double tol = 0.0);

/// Leading principal minors det(m[0..k, 0..k]), k = 1..n, via unpivoted elimination.
/// Stops early (returns the prefix) at the first non-positive pivot, since the
/// remaining minors are then not needed for the M-matrix test.
[[nodiscard]] Vec leading_principal_minors(const Mat& m);

/// Hurwitz test valid for Metzler input only: -m must be a nonsingular
/// M-matrix, i.e. all leading principal minors of -m are > 0 (pivots > tol).
/// Throws std::invalid_argument if m is not Metzler within tol.
[[nodiscard]] bool metzler_is_hurwitz(const Mat& m, double tol = kDefaultTol);

/// Schur test valid for nonnegative input only: I - m must be a nonsingular
/// M-matrix. Throws std::invalid_argument if m has entries below -tol.
[[nodiscard]] bool nonneg_is_schur(const Mat& m, double tol = kDefaultTol);

// ============================================================================
// Matrix exponential
// ============================================================================

/// e^{m t} by scaling and squaring around a truncated Taylor core.
///
/// Metzler inputs are shifted by their smallest diagonal entry so that the
/// series and all squarings run over nonnegative matrices; the result is then
/// nonnegative in floating point as well. Other inputs use a trace shift.
/// Throws NumericRangeError when the result is not finite.
[[nodiscard]] Mat expm(const Mat& m, double t);

}  // namespace posobs
