#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace multiscan {

// Scale weight rho used in the denominator of the scan statistic.  Two
// admissible families:
//
//   polynomial    rho(x) = x^beta             with beta in [0, 1/2)
//   logarithmic   rho(x) = sqrt(x) * (log(1/x))^beta   with beta in (1/2, inf)
//
// Both vanish at 0 slowly enough that the weighted scan statistic stays
// bounded in probability under the null; the admissible beta ranges are part
// of the contract and are enforced at construction.
enum class WeightFamily { polynomial, logarithmic };

class WeightFunction {
 public:
  WeightFunction(WeightFamily family, double beta) : family_(family), beta_(beta) {
    if (!std::isfinite(beta)) throw std::invalid_argument("weight: beta must be finite");
    if (family == WeightFamily::polynomial) {
      if (beta < 0.0 || beta >= 0.5)
        throw std::invalid_argument("weight: polynomial beta must lie in [0, 0.5)");
    } else {
      if (beta <= 0.5)
        throw std::invalid_argument("weight: logarithmic beta must be greater than 0.5");
    }
  }

  static WeightFunction polynomial(double beta) {
    return WeightFunction(WeightFamily::polynomial, beta);
  }
  static WeightFunction logarithmic(double beta) {
    return WeightFunction(WeightFamily::logarithmic, beta);
  }

  // Evaluate rho(x).  The scan statistic only ever asks for x = h/N with
  // 1 <= h <= N/2, so the domain is the open-closed interval (0, 1/2] -- but
  // we accept anything in (0, 1) and reject the rest.
  double operator()(double x) const {
    if (!(x > 0.0 && x < 1.0))
      throw std::domain_error("weight: argument must lie in (0, 1)");
    if (family_ == WeightFamily::polynomial) return std::pow(x, beta_);
    return std::sqrt(x) * std::pow(std::log(1.0 / x), beta_);
  }

  WeightFamily family() const { return family_; }
  double beta() const { return beta_; }

  // Round-trippable textual form, e.g. "poly:0.25" or "log:1".
  std::string spec() const {
    std::ostringstream os;
    os << (family_ == WeightFamily::polynomial ? "poly:" : "log:") << beta_;
    return os.str();
  }

 private:
  WeightFamily family_;
  double beta_;
};

}  // namespace multiscan
