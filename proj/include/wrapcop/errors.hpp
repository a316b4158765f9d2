#pragma once

#include <stdexcept>
#include <string>

namespace wrapcop {

/* Invalid distribution or model parameters (wrong sign, out of range, ...). */
class invalid_parameter_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/* Evaluation point outside the unit interval / hypercube. */
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/* Mismatched lengths, unsupported dimensions, malformed shapes. */
class dimension_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/* A numeric routine could not reach the requested tolerance. */
class numeric_error : public std::runtime_error {
public:
  numeric_error(const std::string& what, double achieved_tolerance)
      : std::runtime_error(what), achieved(achieved_tolerance) {}
  double achieved;
};

/* Density values too extreme for grid quadrature (unbounded generator). */
class singular_generator_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/* Bad input data: parse failures, degenerate columns, schema violations. */
class data_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace wrapcop
