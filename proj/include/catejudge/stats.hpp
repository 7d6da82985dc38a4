#pragma once

#include "catejudge/types.hpp"

namespace catejudge {

// Standard normal CDF, Phi(x) = 0.5 * erfc(-x / sqrt(2)).
double normal_cdf(double x);

// Inverse standard normal CDF; |Phi(q) - p| <= 1e-8 on (0, 1).
// Throws std::domain_error outside (0, 1).
double normal_quantile(double p);

// AIPW pseudo-outcome Gamma = w(y - mu1)/e + mu1 - (1-w)(y - mu0)/(1-e) - mu0.
// E[Gamma | X] = tau(X) when the nuisances are true. Throws std::domain_error
// unless e is in (0, 1).
double aipw_score(int w, double y, double mu0, double mu1, double e);

// Point estimate = mean(psi_plus), var_hat = divide-by-n empirical variance,
// se = sqrt(var_hat / n), CI = point -+ q_{1-alpha/2} * se.
ErrorEstimate mean_and_ci(const InfluenceValues& psi_plus, double alpha);

}  // namespace catejudge
