#pragma once

#include <stdexcept>
#include <string>

namespace fchp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInstance : public Error {
 public:
  using Error::Error;
};

class BrokenReference : public Error {
 public:
  using Error::Error;
};

class UnsatisfiableStorage : public Error {
 public:
  UnsatisfiableStorage(std::size_t server, std::size_t content, int period);

  std::size_t server;
  std::size_t content;
  int period;
};

class IncompleteSolution : public Error {
 public:
  using Error::Error;
};

/// No feasible plan could be found (construction exhausted the horizon, etc).
class Infeasible : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class StaleMove : public Error {
 public:
  using Error::Error;
};

class EmptyInstance : public Error {
 public:
  using Error::Error;
};

class ImageTooSmall : public Error {
 public:
  using Error::Error;
};

/// The exact search ran out of nodes before finding any feasible plan.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace fchp
