#pragma once
#include <stdexcept>
#include <string>

namespace pmap {

// Input is well formed but outside the supported graphs or elements.
// The CLI maps this to exit status 2.
struct DomainError : std::runtime_error {
  std::string tag;
  DomainError(std::string tag_, const std::string& what)
      : std::runtime_error(what), tag(std::move(tag_)) {}
};

// Syntax errors in words, expressions or JSON. Exit status 1.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pmap
