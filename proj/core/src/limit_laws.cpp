#include "hdmean/limit_laws.hpp"

#include <cmath>
#include <stdexcept>
#include <numbers>

namespace hdmean {

std::string_view law_name(LimitLaw law) {
  switch (law) {
    case LimitLaw::StdNormal:
      return "normal";
    case LimitLaw::GumbelMax:
      return "gumbel";
    case LimitLaw::ChiSq4:
      return "chisq4";
  }
  return "?";
}

double gumbel_intensity(double y) { return std::numbers::inv_sqrtpi * std::exp(-y / 2.0); }

double normalize_max(double m, std::size_t p) {
  if (p < 2) {
    throw std::invalid_argument("normalize_max: the max-type normalisation needs p >= 2");
  }
  const double lp = std::log(static_cast<double>(p));
  return m - 2.0 * lp + std::log(lp);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
}

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double limit_cdf(LimitLaw law, double x) {
  switch (law) {
    case LimitLaw::StdNormal:
      return 0.5 * std::erfc(-x / std::numbers::sqrt2);
    case LimitLaw::GumbelMax:
      return std::exp(-gumbel_intensity(x));
    case LimitLaw::ChiSq4:
      if (!(x > 0.0)) return 0.0;
      return -std::expm1(-x / 2.0) - (x / 2.0) * std::exp(-x / 2.0);
  }
  return 0.0;
}

double limit_sf(LimitLaw law, double x) {
  switch (law) {
    case LimitLaw::StdNormal:
      return normal_sf(x);
    case LimitLaw::GumbelMax:
      return -std::expm1(-gumbel_intensity(x));
    case LimitLaw::ChiSq4:
      if (!(x > 0.0)) return 1.0;
      return (1.0 + x / 2.0) * std::exp(-x / 2.0);
  }
  return 1.0;
}

}  // namespace hdmean
