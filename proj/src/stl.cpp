#include "falsify/stl.hpp"

#include "falsify/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace falsify {

struct Formula::Node {
  Kind kind = Kind::Atom;
  Affine affine;
  Interval interval;
  std::vector<Formula> children;
};

Affine Affine::variable(std::size_t column, double coefficient) {
  Affine f;
  if (coefficient != 0.0) {
    f.terms_.emplace_back(column, coefficient);
  }
  return f;
}

double Affine::operator()(std::span<const double> row) const {
  double value = constant_;
  for (const auto &[column, coefficient] : terms_) {
    value += coefficient * row[column];
  }
  return value;
}

Affine Affine::operator+(const Affine &other) const {
  Affine sum(constant_ + other.constant_);
  auto a = terms_.begin();
  auto b = other.terms_.begin();
  while (a != terms_.end() || b != other.terms_.end()) {
    if (b == other.terms_.end() || (a != terms_.end() && a->first < b->first)) {
      sum.terms_.push_back(*a++);
    } else if (a == terms_.end() || b->first < a->first) {
      sum.terms_.push_back(*b++);
    } else {
      const double c = a->second + b->second;
      if (c != 0.0) {
        sum.terms_.emplace_back(a->first, c);
      }
      ++a;
      ++b;
    }
  }
  return sum;
}

Affine Affine::operator-() const { return scaled(-1.0); }

Affine Affine::operator-(const Affine &other) const { return *this + (-other); }

Affine Affine::scaled(double factor) const {
  Affine result(constant_ * factor);
  if (factor != 0.0) {
    for (const auto &[column, coefficient] : terms_) {
      result.terms_.emplace_back(column, coefficient * factor);
    }
  }
  return result;
}

Formula Formula::atom(Affine f) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Atom;
  node->affine = std::move(f);
  return Formula(std::move(node));
}

Formula Formula::negation(Formula phi) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Not;
  node->children.push_back(std::move(phi));
  return Formula(std::move(node));
}

Formula Formula::conjunction(Formula lhs, Formula rhs) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::And;
  node->children = {std::move(lhs), std::move(rhs)};
  return Formula(std::move(node));
}

Formula Formula::disjunction(Formula lhs, Formula rhs) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Or;
  node->children = {std::move(lhs), std::move(rhs)};
  return Formula(std::move(node));
}

Formula Formula::implication(Formula lhs, Formula rhs) {
  return disjunction(negation(std::move(lhs)), std::move(rhs));
}

namespace {

void check_interval(const Interval &interval) {
  if (!(interval.lo >= 0.0) || !(interval.hi >= interval.lo) || !std::isfinite(interval.hi)) {
    throw Error(fmt::format("invalid temporal interval [{}, {}]", interval.lo, interval.hi));
  }
}

} // namespace

Formula Formula::until(Interval interval, Formula lhs, Formula rhs) {
  check_interval(interval);
  auto node = std::make_shared<Node>();
  node->kind = Kind::Until;
  node->interval = interval;
  node->children = {std::move(lhs), std::move(rhs)};
  return Formula(std::move(node));
}

Formula Formula::always(Interval interval, Formula phi) {
  check_interval(interval);
  auto node = std::make_shared<Node>();
  node->kind = Kind::Always;
  node->interval = interval;
  node->children.push_back(std::move(phi));
  return Formula(std::move(node));
}

Formula Formula::eventually(Interval interval, Formula phi) {
  check_interval(interval);
  auto node = std::make_shared<Node>();
  node->kind = Kind::Eventually;
  node->interval = interval;
  node->children.push_back(std::move(phi));
  return Formula(std::move(node));
}

Formula::Kind Formula::kind() const { return node_->kind; }
const Affine &Formula::affine() const { return node_->affine; }
const Interval &Formula::interval() const { return node_->interval; }
std::size_t Formula::arity() const { return node_->children.size(); }
const Formula &Formula::child(std::size_t i) const { return node_->children.at(i); }

bool Formula::is_temporal() const {
  return node_->kind == Kind::Until || node_->kind == Kind::Always || node_->kind == Kind::Eventually;
}

bool Formula::operator==(const Formula &other) const {
  if (node_ == other.node_) {
    return true;
  }
  if (node_->kind != other.node_->kind) {
    return false;
  }
  if (node_->kind == Kind::Atom) {
    return node_->affine == other.node_->affine;
  }
  if (is_temporal() && !(node_->interval == other.node_->interval)) {
    return false;
  }
  return node_->children == other.node_->children;
}

double horizon(const Formula &phi) {
  switch (phi.kind()) {
  case Formula::Kind::Atom:
    return 0.0;
  case Formula::Kind::Not:
    return horizon(phi.child(0));
  case Formula::Kind::And:
  case Formula::Kind::Or:
    return std::max(horizon(phi.child(0)), horizon(phi.child(1)));
  case Formula::Kind::Always:
  case Formula::Kind::Eventually:
    return phi.interval().hi + horizon(phi.child(0));
  case Formula::Kind::Until:
    return phi.interval().hi + std::max(horizon(phi.child(0)), horizon(phi.child(1)));
  }
  return 0.0;
}

namespace {

class FormulaParser {
public:
  FormulaParser(const std::vector<std::string> &outputs, const std::vector<std::string> &discrete)
      : outputs_(outputs), discrete_(discrete) {}

  Formula formula(const SExpr &e) const {
    if (!e.is_list() || e.items.empty()) {
      e.fail(fmt::format("expected a formula, got '{}'", to_string(e)));
    }
    const std::string_view op = e.head();
    if (op.empty()) {
      e.fail("formula must start with an operator");
    }
    if (op == "not") {
      expect_arity(e, 1);
      return Formula::negation(formula(e.items[1]));
    }
    if (op == "and" || op == "or") {
      if (e.items.size() < 3) {
        e.fail(fmt::format("'{}' needs at least two operands", op));
      }
      Formula result = formula(e.items[1]);
      for (std::size_t i = 2; i < e.items.size(); ++i) {
        result = op == "and" ? Formula::conjunction(result, formula(e.items[i]))
                             : Formula::disjunction(result, formula(e.items[i]));
      }
      return result;
    }
    if (op == "implies") {
      expect_arity(e, 2);
      return Formula::implication(formula(e.items[1]), formula(e.items[2]));
    }
    if (op == "always" || op == "eventually") {
      expect_arity(e, 2);
      const Interval interval = parse_interval(e.items[1]);
      Formula body = formula(e.items[2]);
      return op == "always" ? Formula::always(interval, body) : Formula::eventually(interval, body);
    }
    if (op == "until") {
      expect_arity(e, 3);
      const Interval interval = parse_interval(e.items[1]);
      return Formula::until(interval, formula(e.items[2]), formula(e.items[3]));
    }
    if (op == "<=" || op == "<" || op == ">=" || op == ">" || op == "=") {
      expect_arity(e, 2);
      const Affine lhs = expression(e.items[1]);
      const Affine rhs = expression(e.items[2]);
      if (op == "<=" || op == "<") {
        return Formula::atom(rhs - lhs);
      }
      if (op == ">=" || op == ">") {
        return Formula::atom(lhs - rhs);
      }
      const Affine difference = lhs - rhs;
      const double band = is_discrete(difference) ? 0.5 : 0.0;
      return Formula::conjunction(Formula::atom(difference + Affine(band)),
                                  Formula::atom(-difference + Affine(band)));
    }
    e.items.front().fail(fmt::format("unknown operator '{}'", op));
  }

private:
  static void expect_arity(const SExpr &e, std::size_t n) {
    if (e.items.size() != n + 1) {
      e.fail(fmt::format("'{}' takes {} operand{}, got {}", e.head(), n, n == 1 ? "" : "s", e.items.size() - 1));
    }
  }

  static double bound(const SExpr &e) {
    if (e.is_atom()) {
      std::string lower = e.text;
      std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
      if (lower == "inf" || lower == "+inf" || lower == "infinity" || lower == "+infinity") {
        e.fail("unbounded interval; temporal operators must be bounded");
      }
    }
    const auto value = e.number();
    if (!value) {
      e.fail(fmt::format("interval bound must be a number, got '{}'", to_string(e)));
    }
    return *value;
  }

  static Interval parse_interval(const SExpr &e) {
    if (!e.is_list() || e.items.size() != 2) {
      e.fail("malformed interval; expected (lo hi)");
    }
    const Interval interval{bound(e.items[0]), bound(e.items[1])};
    if (interval.lo < 0.0) {
      e.fail(fmt::format("interval lower bound {} is negative", interval.lo));
    }
    if (interval.lo > interval.hi) {
      e.fail(fmt::format("malformed interval: lo {} > hi {}", interval.lo, interval.hi));
    }
    return interval;
  }

  Affine expression(const SExpr &e) const {
    if (auto value = e.number()) {
      return Affine(*value);
    }
    if (e.is_atom()) {
      const auto it = std::find(outputs_.begin(), outputs_.end(), e.text);
      if (it == outputs_.end()) {
        e.fail(fmt::format("unknown variable '{}'", e.text));
      }
      return Affine::variable(static_cast<std::size_t>(it - outputs_.begin()));
    }
    if (!e.is_list() || e.items.size() < 2 || e.head().empty()) {
      e.fail(fmt::format("malformed expression '{}'", to_string(e)));
    }
    const std::string_view op = e.head();
    if (op == "+") {
      Affine sum;
      for (std::size_t i = 1; i < e.items.size(); ++i) {
        sum = sum + expression(e.items[i]);
      }
      return sum;
    }
    if (op == "-") {
      if (e.items.size() == 2) {
        return -expression(e.items[1]);
      }
      Affine difference = expression(e.items[1]);
      for (std::size_t i = 2; i < e.items.size(); ++i) {
        difference = difference - expression(e.items[i]);
      }
      return difference;
    }
    if (op == "*") {
      Affine product(1.0);
      bool seen_variable = false;
      for (std::size_t i = 1; i < e.items.size(); ++i) {
        Affine factor = expression(e.items[i]);
        if (factor.is_constant()) {
          product = product.scaled(factor.constant());
        } else if (product.is_constant() && !seen_variable) {
          product = factor.scaled(product.constant());
          seen_variable = true;
        } else {
          e.fail("non-affine product; only constant factors may multiply a variable");
        }
      }
      return product;
    }
    if (op == "/") {
      if (e.items.size() != 3) {
        e.fail("'/' takes two operands");
      }
      const Affine divisor = expression(e.items[2]);
      if (!divisor.is_constant() || divisor.constant() == 0.0) {
        e.items[2].fail("divisor must be a non-zero constant");
      }
      return expression(e.items[1]).scaled(1.0 / divisor.constant());
    }
    e.items.front().fail(fmt::format("unknown operator '{}' in expression", op));
  }

  bool is_discrete(const Affine &f) const {
    if (f.terms().empty()) {
      return false;
    }
    return std::all_of(f.terms().begin(), f.terms().end(), [&](const auto &term) {
      return std::find(discrete_.begin(), discrete_.end(), outputs_[term.first]) != discrete_.end();
    });
  }

  const std::vector<std::string> &outputs_;
  const std::vector<std::string> &discrete_;
};

std::string number_text(double value) { return fmt::format("{}", value); }

std::string affine_text(const Affine &f, const std::vector<std::string> &outputs) {
  if (f.is_constant()) {
    return number_text(f.constant());
  }
  std::string out = "(+ " + number_text(f.constant());
  for (const auto &[column, coefficient] : f.terms()) {
    out += fmt::format(" (* {} {})", number_text(coefficient), outputs.at(column));
  }
  return out + ")";
}

std::string interval_text(const Interval &interval) {
  return fmt::format("({} {})", number_text(interval.lo), number_text(interval.hi));
}

} // namespace

Formula parse_formula(const SExpr &expr, const std::vector<std::string> &outputs,
                      const std::vector<std::string> &discrete) {
  return FormulaParser(outputs, discrete).formula(expr);
}

Formula parse_formula(std::string_view text, const std::vector<std::string> &outputs,
                      const std::vector<std::string> &discrete) {
  return parse_formula(parse_sexpr(text), outputs, discrete);
}

std::string to_sexpr(const Formula &phi, const std::vector<std::string> &outputs) {
  switch (phi.kind()) {
  case Formula::Kind::Atom:
    return fmt::format("(>= {} 0)", affine_text(phi.affine(), outputs));
  case Formula::Kind::Not:
    return fmt::format("(not {})", to_sexpr(phi.child(0), outputs));
  case Formula::Kind::And:
    return fmt::format("(and {} {})", to_sexpr(phi.child(0), outputs), to_sexpr(phi.child(1), outputs));
  case Formula::Kind::Or:
    return fmt::format("(or {} {})", to_sexpr(phi.child(0), outputs), to_sexpr(phi.child(1), outputs));
  case Formula::Kind::Always:
    return fmt::format("(always {} {})", interval_text(phi.interval()), to_sexpr(phi.child(0), outputs));
  case Formula::Kind::Eventually:
    return fmt::format("(eventually {} {})", interval_text(phi.interval()), to_sexpr(phi.child(0), outputs));
  case Formula::Kind::Until:
    return fmt::format("(until {} {} {})", interval_text(phi.interval()), to_sexpr(phi.child(0), outputs),
                       to_sexpr(phi.child(1), outputs));
  }
  return {};
}

} // namespace falsify
