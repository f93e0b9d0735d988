#pragma once

#include "falsify/sexpr.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace falsify {

/// Bounded time interval [lo, hi] of a temporal operator.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Interval &) const = default;
};

/// Affine function c0 + sum(c_i * y_i) over output columns. Terms are kept
/// sorted by column with zero coefficients dropped, so equal functions
/// compare equal.
class Affine {
public:
  Affine() = default;
  explicit Affine(double constant) : constant_(constant) {}

  static Affine variable(std::size_t column, double coefficient = 1.0);

  double constant() const { return constant_; }
  const std::vector<std::pair<std::size_t, double>> &terms() const { return terms_; }

  double operator()(std::span<const double> row) const;

  Affine operator+(const Affine &other) const;
  Affine operator-(const Affine &other) const;
  Affine operator-() const;
  Affine scaled(double factor) const;
  bool is_constant() const { return terms_.empty(); }

  bool operator==(const Affine &) const = default;

private:
  double constant_ = 0.0;
  std::vector<std::pair<std::size_t, double>> terms_;
};

/// Immutable STL formula; subtrees are shared between copies.
class Formula {
public:
  enum class Kind { Atom, Not, And, Or, Until, Always, Eventually };

  /// The predicate `f(y) >= 0`.
  static Formula atom(Affine f);
  static Formula negation(Formula phi);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula disjunction(Formula lhs, Formula rhs);
  static Formula implication(Formula lhs, Formula rhs);
  static Formula until(Interval interval, Formula lhs, Formula rhs);
  static Formula always(Interval interval, Formula phi);
  static Formula eventually(Interval interval, Formula phi);

  Kind kind() const;
  const Affine &affine() const;
  const Interval &interval() const;
  std::size_t arity() const;
  const Formula &child(std::size_t i) const;
  bool is_temporal() const;

  bool operator==(const Formula &other) const;

private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

/// Least time T such that the robustness at time 0 depends only on the
/// trace restricted to [0, T].
double horizon(const Formula &phi);

/// Parses the S-expression grammar of requirements. `outputs` names the
/// trace columns; `=` on a name listed in `discrete` compares with a
/// half-unit band instead of a zero-width one.
Formula parse_formula(const SExpr &expr, const std::vector<std::string> &outputs,
                      const std::vector<std::string> &discrete = {});
Formula parse_formula(std::string_view text, const std::vector<std::string> &outputs,
                      const std::vector<std::string> &discrete = {});

/// Renders a formula in the grammar accepted by parse_formula.
std::string to_sexpr(const Formula &phi, const std::vector<std::string> &outputs);

} // namespace falsify
