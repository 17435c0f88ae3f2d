// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace shield {

/// One measured (retention interval, bit error rate) point.
struct AnchorPoint {
    double t_us = 0.0;
    double ber = 0.0;
};

/// Lognormal cell-retention model. A cell's retention time is lognormal, so
/// the probability that a bit read after t microseconds has decayed is
/// BER(t) = Phi((ln t - mu) / sigma) with Phi the standard normal CDF.
struct RetentionCurve {
    double mu_log_us = 0.0;  // mean of ln(retention time in us)
    double sigma_log = 0.0;  // standard deviation of ln(retention time)
};

/// Fits the two-parameter curve exactly through two anchors.
/// Anchors may be given in either order; they must have distinct times,
/// distinct rates, and the rate must increase with time.
RetentionCurve calibrate_retention(AnchorPoint a, AnchorPoint b);

/// Bit error rate after holding data for t_us without refresh.
/// t_us == 0 gives 0; the curve approaches 1 for very long intervals.
double ber_at(const RetentionCurve& curve, double t_us);

/// Longest refresh interval whose error rate does not exceed target_ber.
/// Inverse of ber_at, found by bisection on the monotone curve.
double interval_for_ber(const RetentionCurve& curve, double target_ber);

/// Standard normal CDF.
double normal_cdf(double z);

/// Inverse standard normal CDF on (0, 1), accurate to double round-off.
double normal_quantile(double p);

}  // namespace shield
