#pragma once

// Exact rational scalars, vectors and matrices, plus exact Gauss-Jordan
// solving. Everything downstream is built on these types; there is no
// floating point anywhere in the library.

#include <compare>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <gmpxx.h>

#include "matchfair/common.hpp"

namespace matchfair {

/// Arbitrary-precision rational in canonical form (gcd 1, positive
/// denominator, zero as 0/1).
class Rat {
 public:
  Rat() = default;
  Rat(long value) : value_(value) {}  // NOLINT(google-explicit-constructor)
  Rat(int value) : value_(static_cast<long>(value)) {}  // NOLINT
  Rat(long numerator, long denominator) {
    if (denominator == 0) throw DivisionByZero();
    value_ = mpq_class(numerator, denominator);
    value_.canonicalize();
  }
  explicit Rat(mpq_class value) : value_(std::move(value)) { value_.canonicalize(); }

  /// Parses "p/q" or "p" with an optional leading '-'. Nothing else is
  /// accepted: no whitespace, no '+', no decimal point.
  static Rat parse(std::string_view text) {
    auto digits = [](std::string_view part) {
      return !part.empty() &&
             std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    std::string_view body = text;
    if (!body.empty() && body.front() == '-') body.remove_prefix(1);
    const auto slash = body.find('/');
    const std::string_view num = body.substr(0, slash);
    const std::string_view den = slash == std::string_view::npos ? std::string_view{"1"}
                                                                  : body.substr(slash + 1);
    if (!digits(num) || !digits(den)) {
      throw ParseError("malformed rational \"" + std::string(text) + "\"");
    }
    mpz_class n(std::string(num), 10);
    mpz_class d(std::string(den), 10);
    if (d == 0) throw ParseError("zero denominator in rational \"" + std::string(text) + "\"");
    if (text.front() == '-') n = -n;
    mpq_class q(n, d);
    q.canonicalize();
    return Rat(std::move(q));
  }

  [[nodiscard]] std::string str() const {
    if (value_.get_den() == 1) return value_.get_num().get_str();
    return value_.get_num().get_str() + "/" + value_.get_den().get_str();
  }

  [[nodiscard]] mpz_class numerator() const { return value_.get_num(); }
  [[nodiscard]] mpz_class denominator() const { return value_.get_den(); }
  [[nodiscard]] const mpq_class& raw() const { return value_; }

  [[nodiscard]] int sign() const { return sgn(value_); }
  [[nodiscard]] bool is_zero() const { return sign() == 0; }
  [[nodiscard]] bool is_integer() const { return value_.get_den() == 1; }

  Rat& operator+=(const Rat& other) {
    value_ += other.value_;
    return *this;
  }
  Rat& operator-=(const Rat& other) {
    value_ -= other.value_;
    return *this;
  }
  Rat& operator*=(const Rat& other) {
    value_ *= other.value_;
    return *this;
  }
  Rat& operator/=(const Rat& other) {
    if (other.is_zero()) throw DivisionByZero();
    value_ /= other.value_;
    return *this;
  }

  friend Rat operator+(Rat a, const Rat& b) { return a += b; }
  friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
  friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
  friend Rat operator/(Rat a, const Rat& b) { return a /= b; }
  friend Rat operator-(const Rat& a) { return Rat(mpq_class(-a.value_)); }

  friend bool operator==(const Rat& a, const Rat& b) { return cmp(a.value_, b.value_) == 0; }
  friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
    const int c = cmp(a.value_, b.value_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

 private:
  mpq_class value_;
};

using RatVec = std::vector<Rat>;

inline Rat abs(const Rat& r) { return r.sign() < 0 ? -r : r; }

inline Rat dot(std::span<const Rat> a, std::span<const Rat> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  Rat sum;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_zero() && !b[i].is_zero()) sum += a[i] * b[i];
  }
  return sum;
}

inline bool is_zero_vector(std::span<const Rat> v) {
  return std::all_of(v.begin(), v.end(), [](const Rat& r) { return r.is_zero(); });
}

/// Dense row-major rational matrix.
class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), entries_(rows * cols) {}
  RatMatrix(std::size_t rows, std::size_t cols, RatVec entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_) throw DimensionError("RatMatrix: entry count mismatch");
  }

  static RatMatrix from_rows(const std::vector<RatVec>& rows, std::size_t cols) {
    RatMatrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) throw DimensionError("RatMatrix: ragged rows");
      std::copy(rows[i].begin(), rows[i].end(), m.entries_.begin() + i * cols);
    }
    return m;
  }

  static RatMatrix identity(std::size_t n) {
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }

  Rat& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const Rat& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  [[nodiscard]] std::span<const Rat> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }

  [[nodiscard]] RatVec multiply(std::span<const Rat> x) const {
    if (x.size() != cols_) throw DimensionError("RatMatrix::multiply: length mismatch");
    RatVec out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = dot(row(r), x);
    return out;
  }

  friend bool operator==(const RatMatrix&, const RatMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  RatVec entries_;
};

// --- linear systems -------------------------------------------------------

struct UniqueSolution {
  RatVec x;
};

struct ParametricSolution {
  RatVec particular;
  /// Basis of the null space of A; one vector per free column.
  std::vector<RatVec> null_basis;
};

/// y with y·A = 0 and y·b = 1.
struct InconsistentSystem {
  RatVec row_combination;
};

using LinearSolution = std::variant<UniqueSolution, ParametricSolution, InconsistentSystem>;

namespace detail {

/// Reduced row echelon form of `m`, pivoting on the first row with a nonzero
/// entry in each column among the first `pivot_cols` columns. Returns the
/// pivot column of each leading row.
inline std::vector<std::size_t> rref_in_place(std::vector<RatVec>& m, std::size_t pivot_cols) {
  std::vector<std::size_t> pivots;
  std::size_t pivot_row = 0;
  for (std::size_t col = 0; col < pivot_cols && pivot_row < m.size(); ++col) {
    std::size_t found = pivot_row;
    while (found < m.size() && m[found][col].is_zero()) ++found;
    if (found == m.size()) continue;
    std::swap(m[pivot_row], m[found]);
    RatVec& prow = m[pivot_row];
    const Rat inv = Rat(1) / prow[col];
    for (auto& v : prow) {
      if (!v.is_zero()) v *= inv;
    }
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == pivot_row || m[r][col].is_zero()) continue;
      const Rat factor = m[r][col];
      for (std::size_t c = 0; c < prow.size(); ++c) {
        if (!prow[c].is_zero()) m[r][c] -= factor * prow[c];
      }
    }
    pivots.push_back(col);
    ++pivot_row;
  }
  return pivots;
}

}  // namespace detail

/// Solves A x = b exactly.
inline LinearSolution solve_linear(const RatMatrix& a, std::span<const Rat> b) {
  if (b.size() != a.rows()) throw DimensionError("solve_linear: rhs length differs from row count");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  // Augmented [A | b | I] so row operations are tracked for the witness.
  std::vector<RatVec> aug(m, RatVec(n + 1 + m));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) aug[r][c] = a(r, c);
    aug[r][n] = b[r];
    aug[r][n + 1 + r] = 1;
  }
  const auto pivots = detail::rref_in_place(aug, n);
  const std::size_t rank = pivots.size();
  for (std::size_t r = rank; r < m; ++r) {
    if (!aug[r][n].is_zero()) {
      const Rat scale = Rat(1) / aug[r][n];
      RatVec y(aug[r].begin() + static_cast<std::ptrdiff_t>(n + 1), aug[r].end());
      for (auto& v : y) v *= scale;
      return InconsistentSystem{std::move(y)};
    }
  }
  RatVec particular(n);
  for (std::size_t k = 0; k < rank; ++k) particular[pivots[k]] = aug[k][n];
  if (rank == n) return UniqueSolution{std::move(particular)};

  std::vector<bool> is_pivot(n, false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<RatVec> basis;
  for (std::size_t free = 0; free < n; ++free) {
    if (is_pivot[free]) continue;
    RatVec v(n);
    v[free] = 1;
    for (std::size_t k = 0; k < rank; ++k) v[pivots[k]] = -aug[k][free];
    basis.push_back(std::move(v));
  }
  return ParametricSolution{std::move(particular), std::move(basis)};
}

inline std::size_t rank_of(std::vector<RatVec> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  return detail::rref_in_place(rows, cols).size();
}

}  // namespace matchfair
