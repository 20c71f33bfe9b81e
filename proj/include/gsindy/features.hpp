#pragma once

// Candidate term libraries over the state variables (x) or (x, x') and their
// evaluation into design matrices.

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gsindy/error.hpp"

namespace gsindy {

/// Monomial in the state variables; all-zero exponents is the constant term.
class Term {
 public:
  Term() = default;
  explicit Term(std::vector<int> exponents);

  static Term constant(int arity) { return Term(std::vector<int>(static_cast<std::size_t>(arity), 0)); }
  /// Parses `1`, `x`, `x^3`, `x'`, `x'^3` or a space-separated product such as `x x'`.
  static Term parse(std::string_view name, int arity);

  const std::vector<int>& exponents() const noexcept { return exponents_; }
  int arity() const noexcept { return static_cast<int>(exponents_.size()); }
  int degree() const noexcept;
  bool is_constant() const noexcept { return degree() == 0; }
  std::string name() const;

  template <typename Scalar, typename Row>
  Scalar evaluate(const Row& state) const {
    Scalar value(1);
    for (std::size_t j = 0; j < exponents_.size(); ++j)
      for (int e = 0; e < exponents_[j]; ++e) value *= state(static_cast<Eigen::Index>(j));
    return value;
  }

  friend bool operator==(const Term&, const Term&) = default;

 private:
  std::vector<int> exponents_;
};

/// Library ordering: constant first, then ascending total degree, ties by
/// descending exponent tuple (x before x', x^2 before x x').
bool term_order_less(const Term& lhs, const Term& rhs) noexcept;

class FeatureLibrary {
 public:
  FeatureLibrary() = default;

  /// Constant plus every monomial of total degree <= `degree`. With
  /// `cross_terms` false, mixed products such as x x' are omitted.
  static FeatureLibrary polynomial(int degree, int arity, bool cross_terms = true);

  /// Exactly the given terms, order preserved. Rejects duplicates, mixed
  /// arity and a constant term anywhere but first.
  static FeatureLibrary custom(std::vector<Term> terms);
  static FeatureLibrary custom(const std::vector<std::string>& names, int arity);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(terms_.size()); }
  int arity() const noexcept { return arity_; }
  std::optional<Eigen::Index> index_of(const Term& term) const;
  std::vector<std::string> names() const;

  /// Row of term values at a single state.
  template <typename Scalar, int Dim>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate_row(const Eigen::Matrix<Scalar, Dim, 1>& state) const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row(size());
    for (Eigen::Index j = 0; j < size(); ++j)
      row(j) = terms_[static_cast<std::size_t>(j)].template evaluate<Scalar>(state);
    return row;
  }

  friend bool operator==(const FeatureLibrary&, const FeatureLibrary&) = default;

 private:
  FeatureLibrary(std::vector<Term> terms, int arity) : terms_(std::move(terms)), arity_(arity) {}

  std::vector<Term> terms_;
  int arity_ = 0;
};

inline FeatureLibrary polynomial_library(int degree, int arity, bool cross_terms = true) {
  return FeatureLibrary::polynomial(degree, arity, cross_terms);
}

inline FeatureLibrary custom_library(std::vector<Term> terms) {
  return FeatureLibrary::custom(std::move(terms));
}

/// Design matrix: one row per state sample, one column per library term.
/// Throws NonFiniteRowError naming the first offending row.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> evaluate(
    const FeatureLibrary& library, const Eigen::MatrixBase<Derived>& states) {
  using Scalar = typename Derived::Scalar;
  if (states.cols() != library.arity())
    throw Error(ErrorKind::InvalidArgument,
                "state matrix has " + std::to_string(states.cols()) + " columns, library arity is " +
                    std::to_string(library.arity()));
  const Eigen::Index rows = states.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> theta(rows, library.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row = states.row(i);
    if (!row.allFinite())
      throw NonFiniteRowError("non-finite state at row " + std::to_string(i),
                              static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < library.size(); ++j)
      theta(i, j) = library.terms()[static_cast<std::size_t>(j)].template evaluate<Scalar>(row);
  }
  return theta;
}

}  // namespace gsindy
