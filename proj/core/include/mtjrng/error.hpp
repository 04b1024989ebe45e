#pragma once

#include <stdexcept>
#include <string>

namespace mtjrng {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, scenario or timing configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Netlist or scenario text that does not follow the grammar.
class ParseError : public ConfigError {
 public:
  ParseError(int line, std::string token, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ", token '" + token +
                    "': " + what),
        line_(line),
        token_(std::move(token)) {}

  int line() const noexcept { return line_; }
  const std::string& token() const noexcept { return token_; }

 private:
  int line_;
  std::string token_;
};

/// Numerical failure: Newton non-convergence, integrator divergence.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Singular nodal matrix, typically a floating node.
class TopologyError : public SolverError {
 public:
  TopologyError(std::string node, const std::string& what)
      : SolverError(what), node_(std::move(node)) {}
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

class DivergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Argument outside the mathematical domain of a model function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtjrng
