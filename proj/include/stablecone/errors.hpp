#pragma once

#include <stdexcept>
#include <string>

namespace stablecone {

// Adaptive quadrature stopped short of its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double value, double error_estimate)
      : std::runtime_error(what), value_(value), error_estimate_(error_estimate) {}
  double value() const { return value_; }
  double error_estimate() const { return error_estimate_; }

 private:
  double value_;
  double error_estimate_;
};

// A rejection sampler hit its iteration cap.
class RejectionCapError : public std::runtime_error {
 public:
  RejectionCapError(const std::string& what, double acceptance_rate)
      : std::runtime_error(what), acceptance_rate_(acceptance_rate) {}
  double acceptance_rate() const { return acceptance_rate_; }

 private:
  double acceptance_rate_;
};

}  // namespace stablecone
