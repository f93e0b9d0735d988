#include "falsify/sexpr.hpp"

#include "falsify/error.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cmath>

namespace falsify {

namespace {

class Reader {
public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> result;
    skip_blank();
    while (pos_ < text_.size()) {
      result.push_back(read());
      skip_blank();
    }
    return result;
  }

private:
  SExpr read() {
    skip_blank();
    if (pos_ >= text_.size()) {
      throw ParseError("unexpected end of input", line_, column_);
    }
    SExpr node;
    node.line = line_;
    node.column = column_;
    const char c = text_[pos_];
    if (c == '(') {
      node.kind = SExpr::Kind::List;
      advance();
      for (;;) {
        skip_blank();
        if (pos_ >= text_.size()) {
          throw ParseError("unbalanced '('", node.line, node.column);
        }
        if (text_[pos_] == ')') {
          advance();
          return node;
        }
        node.items.push_back(read());
      }
    }
    if (c == ')') {
      throw ParseError("unexpected ')'", line_, column_);
    }
    if (c == '"') {
      node.kind = SExpr::Kind::String;
      advance();
      for (;;) {
        if (pos_ >= text_.size()) {
          throw ParseError("unterminated string", node.line, node.column);
        }
        char d = text_[pos_];
        advance();
        if (d == '"') {
          return node;
        }
        if (d == '\\') {
          if (pos_ >= text_.size()) {
            throw ParseError("unterminated string", node.line, node.column);
          }
          d = text_[pos_];
          advance();
          if (d == 'n') {
            d = '\n';
          } else if (d == 't') {
            d = '\t';
          }
        }
        node.text += d;
      }
    }
    while (pos_ < text_.size()) {
      const char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';' || d == '"') {
        break;
      }
      node.text += d;
      advance();
    }
    return node;
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') {
          advance();
        }
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

} // namespace

std::optional<double> SExpr::number() const {
  if (kind != Kind::Atom || text.empty()) {
    return std::nullopt;
  }
  const char *first = text.data();
  const char *last = text.data() + text.size();
  if (*first == '+') {
    ++first;
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string_view SExpr::head() const {
  if (kind != Kind::List || items.empty() || !items.front().is_atom()) {
    return {};
  }
  return items.front().text;
}

void SExpr::fail(const std::string &message) const {
  throw ParseError(message, line, column);
}

std::vector<SExpr> parse_sexprs(std::string_view text) {
  return Reader(text).read_all();
}

SExpr parse_sexpr(std::string_view text) {
  auto all = parse_sexprs(text);
  if (all.empty()) {
    throw ParseError("empty input", 1, 1);
  }
  if (all.size() > 1) {
    all[1].fail("expected a single expression");
  }
  return std::move(all.front());
}

std::string to_string(const SExpr &expr) {
  switch (expr.kind) {
  case SExpr::Kind::Atom:
    return expr.text;
  case SExpr::Kind::String: {
    std::string out = "\"";
    for (char c : expr.text) {
      if (c == '"' || c == '\\') {
        out += '\\';
      }
      out += c;
    }
    return out + "\"";
  }
  case SExpr::Kind::List: {
    std::string out = "(";
    for (std::size_t i = 0; i < expr.items.size(); ++i) {
      if (i > 0) {
        out += ' ';
      }
      out += to_string(expr.items[i]);
    }
    return out + ")";
  }
  }
  return {};
}

} // namespace falsify
