#include "owadd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace owadd {

namespace {

constexpr double kBandwidthFloor = 1e-6;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;

double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) {
        const double d = v - m;
        ss += d * d;
    }
    return ss / static_cast<double>(n - 1);
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("incomplete beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) throw std::invalid_argument("student_t_cdf: dof must be positive");
    if (t == 0.0) return 0.5;
    if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

TTestResult one_sided_t_test(std::span<const double> reference,
                             std::span<const double> current) {
    if (reference.size() < 2 || current.size() < 2) {
        throw std::invalid_argument("one_sided_t_test: both samples need >= 2 elements");
    }
    const double nr = static_cast<double>(reference.size());
    const double nc = static_cast<double>(current.size());
    const double mr = mean(reference);
    const double mc = mean(current);
    const double vr = sample_variance(reference);
    const double vc = sample_variance(current);

    const double se2 = vr / nr + vc / nc;
    if (se2 == 0.0) {
        // Both samples constant: t is undefined. Equal means carry no
        // evidence; unequal constant means are an infinitely strong signal.
        const double dof = nr + nc - 2.0;
        if (mr == mc) return {0.0, dof, 0.5};
        const double inf = std::numeric_limits<double>::infinity();
        return {mr > mc ? inf : -inf, dof, mr > mc ? 1.0 : 0.0};
    }

    const double t = (mr - mc) / std::sqrt(se2);
    const double ur = vr / nr;
    const double uc = vc / nc;
    const double dof = se2 * se2 / (ur * ur / (nr - 1.0) + uc * uc / (nc - 1.0));
    return {t, dof, student_t_cdf(t, dof)};
}

std::vector<double> subsample(std::span<const double> values, std::size_t n, Rng& rng) {
    if (n > values.size()) {
        throw std::invalid_argument("subsample: n exceeds the number of values");
    }
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
        out.push_back(values[idx[i]]);
    }
    return out;
}

KdeModel kde_fit(std::span<const double> errors) {
    if (errors.empty()) throw std::invalid_argument("kde_fit: empty sample");
    KdeModel model;
    model.support_points.assign(errors.begin(), errors.end());
    const double sd = std::sqrt(sample_variance(errors));
    const double n = static_cast<double>(errors.size());
    double h = sd * std::pow(n, -0.2);
    if (h < kBandwidthFloor) {
        h = kBandwidthFloor;
        model.degenerate = true;
    }
    model.bandwidth = h;
    return model;
}

double kde_score_one(const KdeModel& model, double point) {
    const double h = model.bandwidth;
    const double n = static_cast<double>(model.support_points.size());
    double acc = 0.0;
    for (double s : model.support_points) {
        const double z = (point - s) / h;
        acc += std::exp(-0.5 * z * z);
    }
    return acc * kInvSqrt2Pi / (n * h);
}

std::vector<double> kde_score(const KdeModel& model, std::span<const double> points) {
    if (model.support_points.empty() || !(model.bandwidth > 0.0)) {
        throw std::invalid_argument("kde_score: model is not fitted");
    }
    std::vector<double> out;
    out.reserve(points.size());
    for (double p : points) out.push_back(kde_score_one(model, p));
    return out;
}

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    // The alternating series converges slowly near zero where Q is 1 anyway.
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("ks_two_sample: both samples need >= 2 elements");
    }
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double va = sa[i];
        const double vb = sb[j];
        if (va <= vb) ++i;
        if (vb <= va) ++j;
        const double diff = std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
        d = std::max(d, diff);
    }

    const double ne = na * nb / (na + nb);
    const double sqrt_ne = std::sqrt(ne);
    const double lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    return {d, kolmogorov_sf(lambda)};
}

} // namespace owadd
