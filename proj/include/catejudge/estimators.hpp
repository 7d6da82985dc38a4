#pragma once

#include <cstddef>
#include <utility>

#include "catejudge/types.hpp"

namespace catejudge {

// Link eta mapping a conditional mean to the natural parameter scale.
// Means are clamped into the guarded domain before eta / eta' are applied:
// Log floors at mean_floor, Logit clamps to [mean_floor, 1 - mean_floor].
struct LinkFunction {
    enum class Tag { Identity, Log, Logit };
    Tag tag = Tag::Identity;
    double mean_floor = 1e-6;

    double clamp_mean(double mu, bool* clamped = nullptr) const;
    double eta(double mu_clamped) const;
    double eta_prime(double mu_clamped) const;
};

struct EstimateWithInfluence {
    ErrorEstimate estimate;
    InfluenceValues influence;
};

// Per-unit AIPW pseudo-outcomes Gamma_i under the cross-fitted nuisances.
std::vector<double> aipw_scores(const TestDataset& data, const NuisanceFit& nf);

// One-step (EIF) estimate of the absolute error E[(tau(X) - tau_hat(X))^2].
// Summand: (mu1 - mu0 - tau_hat)^2 + 2(mu1 - mu0 - tau_hat) * [w(y - mu1)/e -
// (1-w)(y - mu0)/(1-e)]. The point estimate may be negative and is reported
// as-is.
EstimateWithInfluence eif_absolute_error(const HtePredictions& tau_hat, const TestDataset& data,
                                         const NuisanceFit& nf, double alpha);

// Plug-in estimate: mean of (tau_hat_i - Gamma_i)^2, always >= 0.
EstimateWithInfluence plugin_absolute_error(const HtePredictions& tau_hat,
                                            const TestDataset& data, const NuisanceFit& nf,
                                            double alpha);

// One-step (EIF) estimate of the relative error phi(tau1) - phi(tau2).
// Summand: tau1^2 - tau2^2 - 2(tau1 - tau2) * Gamma_i.
EstimateWithInfluence eif_relative_error(const HtePredictions& tau1, const HtePredictions& tau2,
                                         const TestDataset& data, const NuisanceFit& nf,
                                         double alpha);

// Link-scale generalizations; Identity reproduces the base estimators
// bit-for-bit. clamped_units, when given, receives the count of units whose
// fitted means needed clamping into the link's domain.
EstimateWithInfluence dina_absolute_error(const HtePredictions& tau_hat, const TestDataset& data,
                                          const NuisanceFit& nf, const LinkFunction& link,
                                          double alpha, std::size_t* clamped_units = nullptr);

EstimateWithInfluence dina_relative_error(const HtePredictions& tau1, const HtePredictions& tau2,
                                          const TestDataset& data, const NuisanceFit& nf,
                                          const LinkFunction& link, double alpha,
                                          std::size_t* clamped_units = nullptr);

// Interval rule on two absolute-error estimates at the same alpha and n:
// disjoint CIs pick the lower-error side with confidence 1 - 2*alpha.
ComparisonVerdict compare_absolute(const ErrorEstimate& est1, const ErrorEstimate& est2);

// Sign rule on a relative-error estimate for the ordered pair (tau1, tau2):
// CI above 0 selects the second, below 0 the first, confidence 1 - alpha.
ComparisonVerdict compare_relative(const ErrorEstimate& est);

}  // namespace catejudge
