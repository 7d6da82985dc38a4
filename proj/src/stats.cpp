#include "catejudge/stats.hpp"

#include <cmath>
#include <stdexcept>

#include "catejudge/rng.hpp"

namespace catejudge {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

namespace {

// Acklam's rational approximation, |error| < 1.2e-9 before refinement.
double quantile_initial(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;

    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p must lie in (0, 1)");
    }
    double q = quantile_initial(p);
    // One Halley step against the exact CDF pushes the error below 1e-14.
    double err = normal_cdf(q) - p;
    double u = err * std::sqrt(2.0 * M_PI) * std::exp(0.5 * q * q);
    return q - u / (1.0 + 0.5 * q * u);
}

double aipw_score(int w, double y, double mu0, double mu1, double e) {
    if (!(e > 0.0 && e < 1.0)) {
        throw std::domain_error("aipw_score: propensity must lie in (0, 1)");
    }
    return w * (y - mu1) / e + mu1 - (1 - w) * (y - mu0) / (1.0 - e) - mu0;
}

ErrorEstimate mean_and_ci(const InfluenceValues& psi_plus, double alpha) {
    const auto& v = psi_plus.psi_plus;
    if (v.empty()) throw std::domain_error("mean_and_ci: empty influence values");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("mean_and_ci: alpha must lie in (0, 1)");
    }
    const auto n = v.size();

    long double sum = 0.0L;
    for (double x : v) sum += x;
    const double mean = static_cast<double>(sum / n);

    long double ss = 0.0L;
    for (double x : v) {
        long double c = x - mean;
        ss += c * c;
    }
    const double var_hat = static_cast<double>(ss / n);

    ErrorEstimate est;
    est.point = mean;
    est.var_hat = var_hat;
    est.se = std::sqrt(var_hat / static_cast<double>(n));
    const double half = normal_quantile(1.0 - alpha / 2.0) * est.se;
    est.ci_lo = mean - half;
    est.ci_hi = mean + half;
    est.alpha = alpha;
    est.n = n;
    return est;
}

const char* to_string(Decision d) {
    switch (d) {
        case Decision::SelectFirst: return "select_first";
        case Decision::SelectSecond: return "select_second";
        default: return "inconclusive";
    }
}

const char* to_string(VerdictBasis b) {
    return b == VerdictBasis::AbsoluteDisjoint ? "absolute_disjoint" : "relative_sign";
}

namespace rng {
double quantile_std_normal(double p) { return catejudge::normal_quantile(p); }
}  // namespace rng

}  // namespace catejudge
