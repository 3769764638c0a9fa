#pragma once

#include <span>
#include <vector>

#include "owadd/rng.hpp"

namespace owadd {

struct TTestResult {
    double t_statistic;
    double degrees_of_freedom;
    double p_value;
};

/// One-sided Welch two-sample test of H0: mean(reference) >= mean(current).
/// The p-value is small when the current sample's mean exceeds the
/// reference's. Both samples need at least two elements. Two constant,
/// equal samples have no evidence either way and yield p = 0.5.
TTestResult one_sided_t_test(std::span<const double> reference,
                             std::span<const double> current);

/// CDF of Student's t with `dof` degrees of freedom, evaluated through the
/// regularized incomplete beta function.
double student_t_cdf(double t, double dof);

/// Regularized incomplete beta I_x(a, b) via continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// n elements drawn uniformly without replacement, in draw order.
std::vector<double> subsample(std::span<const double> values, std::size_t n, Rng& rng);

/// One-dimensional Gaussian kernel density estimate.
struct KdeModel {
    std::vector<double> support_points;
    double bandwidth = 0.0;
    /// True when the bandwidth floor engaged (all fitted points identical).
    bool degenerate = false;
};

/// Fits a KDE with Scott's-rule bandwidth h = sd * n^(-1/5). A zero sample
/// standard deviation triggers the 1e-6 bandwidth floor and marks the model
/// degenerate.
KdeModel kde_fit(std::span<const double> errors);

/// Plain (not log) mixture density at each query point, positionally matched.
std::vector<double> kde_score(const KdeModel& model, std::span<const double> points);
double kde_score_one(const KdeModel& model, double point);

struct KsResult {
    double statistic;
    double p_value;
};

/// Two-sample Kolmogorov-Smirnov test: max ECDF gap, asymptotic p-value with
/// the effective-sample-size correction lambda = (sqrt(ne)+0.12+0.11/sqrt(ne))*D.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Survival function of the Kolmogorov distribution, Q(lambda).
double kolmogorov_sf(double lambda);

double mean(std::span<const double> values);
/// Unbiased sample variance (n-1 denominator); 0 for a single element.
double sample_variance(std::span<const double> values);

} // namespace owadd
