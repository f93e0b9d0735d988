#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace falsify {

/// Node of a parsed S-expression. Atoms keep their source text; strings are
/// unescaped. Every node remembers where it started for error reporting.
struct SExpr {
  enum class Kind { Atom, String, List };

  Kind kind = Kind::Atom;
  std::string text;
  std::vector<SExpr> items;
  std::size_t line = 0;
  std::size_t column = 0;

  bool is_list() const { return kind == Kind::List; }
  bool is_atom() const { return kind == Kind::Atom; }
  bool is_string() const { return kind == Kind::String; }
  bool is_symbol(std::string_view name) const { return kind == Kind::Atom && text == name; }

  /// Numeric value of an atom, if it spells a finite number.
  std::optional<double> number() const;

  /// For a list whose first item is an atom, that atom's text.
  std::string_view head() const;

  [[noreturn]] void fail(const std::string &message) const;
};

std::vector<SExpr> parse_sexprs(std::string_view text);

/// Parses exactly one expression.
SExpr parse_sexpr(std::string_view text);

std::string to_string(const SExpr &expr);

} // namespace falsify
