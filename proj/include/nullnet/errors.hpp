#pragma once

#include <stdexcept>
#include <string>

namespace nullnet {

/// Malformed or out-of-contract input data (negative flows, bad CSV rows, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested year, layer or node does not exist in the dataset.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Argument outside the mathematical domain of a function (i == j, z >= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input that is well-formed but carries no information (e.g. zero total weight).
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nullnet
