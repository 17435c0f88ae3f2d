// SPDX-License-Identifier: Apache-2.0

#include "shield/retention.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace shield {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

[[noreturn]] void reject(const char* msg) { throw std::invalid_argument(msg); }

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

void check_curve(const RetentionCurve& c) {
    if (!(c.sigma_log > 0.0) || !std::isfinite(c.sigma_log) || !std::isfinite(c.mu_log_us)) {
        reject("retention curve requires finite mu and positive sigma");
    }
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        reject("quantile argument must lie in (0, 1)");
    }
    // Rational initial guess (Acklam), then two Newton corrections against
    // the erfc-based CDF bring the result to double round-off.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int i = 0; i < 2; ++i) {
        const double err = normal_cdf(x) - p;
        const double pdf = normal_pdf(x);
        if (pdf <= 0.0) {
            break;
        }
        x -= err / pdf;
    }
    return x;
}

RetentionCurve calibrate_retention(AnchorPoint a, AnchorPoint b) {
    if (!(a.t_us > 0.0) || !(b.t_us > 0.0)) {
        reject("anchor times must be positive");
    }
    if (!(a.ber > 0.0 && a.ber < 1.0) || !(b.ber > 0.0 && b.ber < 1.0)) {
        reject("anchor error rates must lie in (0, 1)");
    }
    if (a.t_us > b.t_us) {
        std::swap(a, b);
    }
    if (!(a.t_us < b.t_us)) {
        reject("anchor times must be distinct");
    }
    if (!(a.ber < b.ber)) {
        reject("anchor error rate must increase strictly with time");
    }
    const double z1 = normal_quantile(a.ber);
    const double z2 = normal_quantile(b.ber);
    const double sigma = (std::log(b.t_us) - std::log(a.t_us)) / (z2 - z1);
    return {std::log(a.t_us) - sigma * z1, sigma};
}

double ber_at(const RetentionCurve& curve, double t_us) {
    check_curve(curve);
    if (!(t_us >= 0.0)) {
        reject("retention interval must be nonnegative");
    }
    if (t_us == 0.0) {
        return 0.0;
    }
    return normal_cdf((std::log(t_us) - curve.mu_log_us) / curve.sigma_log);
}

double interval_for_ber(const RetentionCurve& curve, double target_ber) {
    check_curve(curve);
    if (!(target_ber > 0.0 && target_ber < 1.0)) {
        reject("target error rate must lie in (0, 1)");
    }
    double lo = 0.0;
    double hi = 1.0;
    while (ber_at(curve, hi) < target_ber && hi < 1e18) {
        lo = hi;
        hi *= 2.0;
    }
    // Keeps ber(lo) < target <= ber(hi). The stopping width is far below one
    // nanosecond in relative terms, so the round trip through ber_at stays
    // within 1e-6 relative of the target.
    while (hi - lo > 1e-6 + 1e-12 * lo) {
        const double mid = 0.5 * (lo + hi);
        if (ber_at(curve, mid) < target_ber) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace shield
