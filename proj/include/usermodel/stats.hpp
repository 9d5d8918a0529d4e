#pragma once

// Chi-square goodness-of-fit and two-sample Kolmogorov-Smirnov tests, with
// the survival functions they need.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "usermodel/core.hpp"

namespace usermodel {

struct TwoSampleResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool assumption_ok = true;
  std::string assumption_note;
};

/// Regularized upper incomplete gamma Q(a, x), via the power series for
/// x < a + 1 and a Lentz continued fraction otherwise.
inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0)) throw Error(ErrorKind::InvalidArgument, "gamma shape must be > 0");
  if (x <= 0) return 1.0;
  constexpr int kMaxIter = 1000;
  constexpr double kEps = 1e-16;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term, ap = a;
    for (int n = 0; n < kMaxIter; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return std::clamp(1.0 - sum * std::exp(log_prefix), 0.0, 1.0);
  }
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / kTiny, d = 1.0 / b, h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::clamp(std::exp(log_prefix) * h, 0.0, 1.0);
}

inline double chi_square_survival(double statistic, double dof) {
  if (statistic <= 0) return 1.0;
  return regularized_gamma_q(dof / 2.0, statistic / 2.0);
}

/// Survival function of the limiting Kolmogorov distribution, Pr(K > lambda).
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form, converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double odd = 2.0 * k - 1.0;
      cdf += std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

/// Pearson goodness of fit of `observed` counts against category
/// proportions. Cells with zero proportion and zero count are dropped; the
/// assumption rule asks for expected >= 5 in at least 80% of cells and no
/// expected count below 1.
inline TwoSampleResult chi_square_gof(std::span<const double> observed, std::span<const double> proportions) {
  if (observed.size() != proportions.size()) {
    throw Error(ErrorKind::InvalidArgument, "observed and expected differ in length");
  }
  if (observed.size() < 2) throw Error(ErrorKind::InvalidArgument, "chi-square needs at least 2 cells");
  double total = 0.0, mass = 0.0;
  for (std::size_t j = 0; j < observed.size(); ++j) {
    if (observed[j] < 0 || proportions[j] < 0) throw Error(ErrorKind::InvalidArgument, "negative count or proportion");
    total += observed[j];
    mass += proportions[j];
  }
  if (total < 1) throw Error(ErrorKind::EmptySample, "chi-square needs at least one observation");
  if (!(mass > 0)) throw Error(ErrorKind::InvalidArgument, "expected proportions sum to zero");

  TwoSampleResult r;
  std::size_t cells = 0, large = 0;
  bool below_one = false;
  for (std::size_t j = 0; j < observed.size(); ++j) {
    const double e = total * proportions[j] / mass;
    if (e == 0.0) {
      if (observed[j] > 0) {
        throw Error(ErrorKind::ZeroExpectedCell, "cell " + std::to_string(j) + " has count " +
                                                     format_number(observed[j]) + " but proportion 0");
      }
      continue;
    }
    ++cells;
    if (e >= 5.0) ++large;
    if (e < 1.0) below_one = true;
    const double diff = observed[j] - e;
    r.statistic += diff * diff / e;
  }
  if (cells < 2) {
    r.statistic = 0.0;
    r.p_value = 1.0;
  } else {
    r.p_value = chi_square_survival(r.statistic, static_cast<double>(cells - 1));
  }
  if (below_one) {
    r.assumption_ok = false;
    r.assumption_note = "a cell has expected count below 1";
  } else if (static_cast<double>(large) < 0.8 * static_cast<double>(cells)) {
    r.assumption_ok = false;
    r.assumption_note = "fewer than 80% of cells have expected count >= 5";
  }
  return r;
}

/// Two-sample Kolmogorov-Smirnov: D = sup |F_a - F_b|, asymptotic p-value at
/// sqrt(n_a n_b / (n_a + n_b)) * D.
inline TwoSampleResult ks_two_sample(std::span<const double> sample_a, std::span<const double> sample_b) {
  if (sample_a.empty() || sample_b.empty()) throw Error(ErrorKind::EmptySample, "KS needs two non-empty samples");
  std::vector<double> a(sample_a.begin(), sample_a.end()), b(sample_b.begin(), sample_b.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  TwoSampleResult r;
  r.statistic = d;
  const double en = na * nb / (na + nb);
  r.p_value = kolmogorov_survival(std::sqrt(en) * d);
  return r;
}

}  // namespace usermodel
