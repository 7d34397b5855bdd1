#pragma once

#include <cstddef>
#include <string_view>

namespace hdmean {

/// Reference laws used to turn statistics into p-values.
enum class LimitLaw {
  StdNormal,  ///< Phi
  GumbelMax,  ///< F(y) = exp(-pi^{-1/2} exp(-y/2))
  ChiSq4,     ///< 1 - (1 + x/2) exp(-x/2), x >= 0
};

std::string_view law_name(LimitLaw law);

double limit_cdf(LimitLaw law, double x);

/// Upper tail 1 - limit_cdf(law, x), evaluated without cancellation.
double limit_sf(LimitLaw law, double x);

/// h(y) = pi^{-1/2} exp(-y/2): the limit of p * P(|z| > l_p(y)) for the
/// normalisation y = M - 2 log p + log log p.
double gumbel_intensity(double y);

/// M - 2 log p + log log p. Throws std::invalid_argument for p < 2.
double normalize_max(double m, std::size_t p);

double normal_pdf(double x);
double normal_sf(double x);

}  // namespace hdmean
