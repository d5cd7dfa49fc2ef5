#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dval {

struct SourceLoc {
  std::size_t line = 0;
  std::size_t column = 0;

  bool known() const { return line != 0; }
  std::string str() const {
    return known() ? std::to_string(line) + ":" + std::to_string(column) : "?";
  }
};

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(SourceLoc loc, std::string expected)
      : Error("syntax error at " + loc.str() + ": expected " + expected),
        loc_(loc),
        expected_(std::move(expected)) {}

  SourceLoc loc() const { return loc_; }
  const std::string& expected() const { return expected_; }

 private:
  SourceLoc loc_;
  std::string expected_;
};

class UnsupportedFeature : public Error {
 public:
  UnsupportedFeature(std::string construct, SourceLoc loc)
      : Error("unsupported feature '" + construct + "' at " + loc.str()),
        construct_(std::move(construct)),
        loc_(loc) {}

  const std::string& construct() const { return construct_; }
  SourceLoc loc() const { return loc_; }

 private:
  std::string construct_;
  SourceLoc loc_;
};

class SemanticError : public Error {
 public:
  SemanticError(std::string rule, std::string message, SourceLoc loc)
      : Error(rule + " at " + loc.str() + ": " + message),
        rule_(std::move(rule)),
        loc_(loc) {}

  const std::string& rule() const { return rule_; }
  SourceLoc loc() const { return loc_; }

 private:
  std::string rule_;
  SourceLoc loc_;
};

class CyclicTypeGraph : public Error {
 public:
  explicit CyclicTypeGraph(const std::string& type)
      : Error("type hierarchy has a cycle through '" + type + "'") {}
};

}  // namespace dval
