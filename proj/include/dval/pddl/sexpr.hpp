#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "dval/error.hpp"
#include "dval/pddl/model.hpp"

namespace dval::pddl {

// A parsed s-expression. Symbols are case-folded on read.
struct SExpr {
  bool is_list = false;
  std::string symbol;
  std::vector<SExpr> items;
  SourceLoc loc{};

  bool is_symbol() const { return !is_list; }
  bool is_symbol(std::string_view s) const { return !is_list && symbol == s; }

  // Head symbol of a list, or "" when the list is empty or starts with a list.
  std::string_view head() const {
    if (!is_list || items.empty() || items.front().is_list) return {};
    return items.front().symbol;
  }
};

namespace detail {

class SExprReader {
 public:
  explicit SExprReader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip_space();
    while (pos_ < text_.size()) {
      out.push_back(read_one());
      skip_space();
    }
    return out;
  }

 private:
  SourceLoc here() const { return {line_, col_}; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read_one() {
    SExpr e;
    e.loc = here();
    char c = text_[pos_];
    if (c == ')') throw SyntaxError(here(), "expression, found ')'");
    if (c == '(') {
      e.is_list = true;
      advance();
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) throw SyntaxError(here(), "')' before end of input");
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        e.items.push_back(read_one());
      }
      return e;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d))) break;
      advance();
    }
    e.symbol = fold_case(text_.substr(start, pos_ - start));
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace detail

inline std::vector<SExpr> read_sexprs(std::string_view text) {
  return detail::SExprReader(text).read_all();
}

}  // namespace dval::pddl
