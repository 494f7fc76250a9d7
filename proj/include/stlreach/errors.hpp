#pragma once

#include <stdexcept>
#include <string>

namespace stlreach {

// Error taxonomy mirrors the CLI exit-code contract:
//   ConfigError -> 2, InfeasibleError -> 3, NumericalError -> 4.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

class ParseError : public ConfigError {
public:
  ParseError(const std::string &msg, int line, int col)
      : ConfigError(msg + " (line " + std::to_string(line) + ", col " +
                    std::to_string(col) + ")"),
        line(line), col(col) {}
  int line;
  int col;
};

class InfeasibleError : public std::runtime_error {
public:
  explicit InfeasibleError(const std::string &msg) : std::runtime_error(msg) {}
};

class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace stlreach
