#include "stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace chunkseam::stats {

namespace {

constexpr std::uint64_t kExhaustiveThreshold = 200000;

double tie_epsilon(double observed) {
  return 1e-12 * std::max(1.0, std::abs(observed));
}

bool as_or_more_extreme(double delta, double observed, Sidedness sidedness, double eps) {
  if (sidedness == Sidedness::greater) {
    return delta >= observed - eps;
  }
  return std::abs(delta) >= std::abs(observed) - eps;
}

}  // namespace

const char* sidedness_name(Sidedness s) {
  return s == Sidedness::greater ? "greater" : "two_sided";
}

Sidedness sidedness_from_name(const std::string& name) {
  if (name == "greater") return Sidedness::greater;
  if (name == "two_sided") return Sidedness::two_sided;
  throw_error(ErrorCode::config, "unknown sidedness '" + name + "'");
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) {
    throw_error(ErrorCode::invalid_argument, "mean of empty vector");
  }
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) {
    return 0.0;
  }
  auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  if (*mn == *mx) {
    return 0.0;  // identical samples: exact zero, no mean rounding dust
  }
  double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) {
    ss += (x - m) * (x - m);
  }
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::uint64_t permutation_assignments(std::int64_t n_a, std::int64_t n_b,
                                      std::uint64_t threshold) {
  // C(n_a + n_b, n_a), capped.
  std::uint64_t n = static_cast<std::uint64_t>(n_a + n_b);
  std::uint64_t k = static_cast<std::uint64_t>(std::min(n_a, n_b));
  long double c = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (c > static_cast<long double>(threshold) * 2.0L) {
      return threshold + 1;
    }
  }
  return static_cast<std::uint64_t>(c + 0.5L);
}

PermutationResult permutation_test(const std::vector<double>& group_a,
                                   const std::vector<double>& group_b,
                                   std::int64_t n_perm, Sidedness sidedness,
                                   std::uint64_t seed, PermutationMode mode) {
  if (group_a.empty() || group_b.empty()) {
    throw_error(ErrorCode::invalid_argument, "permutation test needs nonempty groups");
  }
  if (n_perm < 1) {
    throw_error(ErrorCode::invalid_argument, "permutation test needs n_perm >= 1");
  }
  auto n_a = static_cast<std::int64_t>(group_a.size());
  auto n_b = static_cast<std::int64_t>(group_b.size());

  PermutationResult result;
  result.sidedness = sidedness;
  result.observed_delta = mean(group_b) - mean(group_a);

  std::vector<double> pooled = group_a;
  pooled.insert(pooled.end(), group_b.begin(), group_b.end());
  auto [mn, mx] = std::minmax_element(pooled.begin(), pooled.end());
  if (*mn == *mx) {
    result.degenerate = true;
    result.p_value = 1.0;
    result.n_permutations = n_perm;
    return result;
  }

  double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
  double eps = tie_epsilon(result.observed_delta);
  // delta for a given group-A subset sum: mean(rest) - mean(subset).
  auto delta_from_sum_a = [&](double sum_a) {
    return (total - sum_a) / static_cast<double>(n_b) - sum_a / static_cast<double>(n_a);
  };

  bool exhaustive;
  switch (mode) {
    case PermutationMode::monte_carlo:
      exhaustive = false;
      break;
    case PermutationMode::exhaustive:
      exhaustive = true;
      break;
    default:
      exhaustive = permutation_assignments(n_a, n_b, kExhaustiveThreshold) <=
                   kExhaustiveThreshold;
  }

  if (exhaustive) {
    std::uint64_t assignments = permutation_assignments(n_a, n_b, kExhaustiveThreshold);
    if (assignments > kExhaustiveThreshold) {
      throw_error(ErrorCode::invalid_argument,
                  "exhaustive permutation enumeration too large (> " +
                      std::to_string(kExhaustiveThreshold) + " assignments)");
    }
    auto n = static_cast<std::int64_t>(pooled.size());
    std::vector<std::int64_t> pick(static_cast<std::size_t>(n_a));
    std::iota(pick.begin(), pick.end(), 0);
    std::int64_t extreme = 0;
    std::int64_t count = 0;
    for (;;) {
      double sum_a = 0.0;
      for (auto idx : pick) {
        sum_a += pooled[static_cast<std::size_t>(idx)];
      }
      ++count;
      if (as_or_more_extreme(delta_from_sum_a(sum_a), result.observed_delta, sidedness,
                             eps)) {
        ++extreme;
      }
      // Next combination in lexicographic order.
      std::int64_t i = n_a - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - n_a + i) {
        --i;
      }
      if (i < 0) {
        break;
      }
      ++pick[static_cast<std::size_t>(i)];
      for (std::int64_t j = i + 1; j < n_a; ++j) {
        pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
    result.exhaustive = true;
    result.n_permutations = count;
    result.p_value = static_cast<double>(extreme) / static_cast<double>(count);
    return result;
  }

  Rng rng = Rng::derive(seed, "permutation");
  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), 0);
  std::int64_t extreme = 0;
  for (std::int64_t rep = 0; rep < n_perm; ++rep) {
    rng.shuffle(order);
    double sum_a = 0.0;
    for (std::int64_t i = 0; i < n_a; ++i) {
      sum_a += pooled[order[static_cast<std::size_t>(i)]];
    }
    if (as_or_more_extreme(delta_from_sum_a(sum_a), result.observed_delta, sidedness,
                           eps)) {
      ++extreme;
    }
  }
  result.exhaustive = false;
  result.n_permutations = n_perm;
  result.p_value =
      static_cast<double>(1 + extreme) / static_cast<double>(n_perm + 1);
  return result;
}

IntervalEstimate bootstrap_ci(const std::vector<double>& samples, std::int64_t n_boot,
                              double level, std::uint64_t seed) {
  return bootstrap_ci(samples, n_boot, level, seed,
                      [](const std::vector<double>& xs) { return mean(xs); });
}

IntervalEstimate bootstrap_ci(
    const std::vector<double>& samples, std::int64_t n_boot, double level,
    std::uint64_t seed,
    const std::function<double(const std::vector<double>&)>& statistic) {
  if (samples.empty()) {
    throw_error(ErrorCode::invalid_argument, "bootstrap needs nonempty samples");
  }
  if (n_boot < 100) {
    throw_error(ErrorCode::invalid_argument, "bootstrap needs n_boot >= 100");
  }
  if (level <= 0.0 || level >= 1.0) {
    throw_error(ErrorCode::invalid_argument, "confidence level must be in (0, 1)");
  }
  IntervalEstimate est;
  est.level = level;
  est.method = "bootstrap_percentile";
  est.point = statistic(samples);
  if (samples.size() == 1) {
    est.lo = est.hi = samples.front();
    est.degenerate = true;
    return est;
  }
  Rng rng = Rng::derive(seed, "bootstrap");
  std::size_t n = samples.size();
  std::vector<double> resample(n);
  std::vector<double> boot_stats(static_cast<std::size_t>(n_boot));
  for (std::int64_t b = 0; b < n_boot; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      resample[i] = samples[rng.next_below(n)];
    }
    boot_stats[static_cast<std::size_t>(b)] = statistic(resample);
  }
  std::sort(boot_stats.begin(), boot_stats.end());
  // Linear interpolation between order statistics.
  auto quantile = [&](double q) {
    double h = q * static_cast<double>(boot_stats.size() - 1);
    auto lo_idx = static_cast<std::size_t>(std::floor(h));
    auto hi_idx = std::min(lo_idx + 1, boot_stats.size() - 1);
    double frac = h - std::floor(h);
    return boot_stats[lo_idx] * (1.0 - frac) + boot_stats[hi_idx] * frac;
  };
  double tail = (1.0 - level) / 2.0;
  est.lo = quantile(tail);
  est.hi = quantile(1.0 - tail);
  return est;
}

IntervalEstimate wilson_ci(std::int64_t successes, std::int64_t n, double level) {
  if (n < 1) {
    throw_error(ErrorCode::invalid_argument, "wilson interval needs n >= 1");
  }
  if (successes < 0 || successes > n) {
    throw_error(ErrorCode::invalid_argument, "wilson interval needs 0 <= successes <= n");
  }
  if (level <= 0.0 || level >= 1.0) {
    throw_error(ErrorCode::invalid_argument, "confidence level must be in (0, 1)");
  }
  double z = normal_quantile(0.5 + level / 2.0);
  double nn = static_cast<double>(n);
  double p_hat = static_cast<double>(successes) / nn;
  double z2 = z * z;
  double denom = 1.0 + z2 / nn;
  double center = (p_hat + z2 / (2.0 * nn)) / denom;
  double half = (z / denom) * std::sqrt(p_hat * (1.0 - p_hat) / nn + z2 / (4.0 * nn * nn));
  IntervalEstimate est;
  est.point = p_hat;
  // Clamp to [0,1] and absorb rounding dust so the interval always contains
  // the point estimate (exact at the k=0 and k=n boundaries).
  est.lo = std::min(std::max(0.0, center - half), p_hat);
  est.hi = std::max(std::min(1.0, center + half), p_hat);
  est.level = level;
  est.method = "wilson";
  return est;
}

double pearson_r(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw_error(ErrorCode::invalid_argument, "pearson_r needs equal-length inputs");
  }
  if (xs.size() < 3) {
    throw_error(ErrorCode::invalid_argument, "pearson_r needs at least 3 points");
  }
  double mx = mean(xs);
  double my = mean(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw_error(ErrorCode::invalid_argument,
                "correlation undefined: zero variance in an input");
  }
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) {
    throw_error(ErrorCode::invalid_argument, "normal quantile needs p in (0, 1)");
  }
  // Acklam's rational approximation ...
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
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // ... polished with two Newton steps on the CDF to full double precision.
  for (int i = 0; i < 2; ++i) {
    double e = normal_cdf(x) - p;
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (pdf > 0.0) {
      x -= e / pdf;
    }
  }
  return x;
}

}  // namespace chunkseam::stats
