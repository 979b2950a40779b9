#include "skillshift/errors.hpp"

namespace skillshift {

SyntaxError::SyntaxError(int line, int column, const std::string& expected,
                         const std::string& found)
    : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) +
            ": expected " + expected + ", found " + found),
      line_(line),
      column_(column) {}

}  // namespace skillshift
