#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace chunkseam::stats {

enum class Sidedness {
  two_sided,
  greater,  // tests mean(b) - mean(a) > 0
};

const char* sidedness_name(Sidedness s);
Sidedness sidedness_from_name(const std::string& name);

enum class PermutationMode {
  automatic,   // exhaustive when C(n_a + n_b, n_a) <= 200,000, else Monte Carlo
  monte_carlo,
  exhaustive,
};

struct PermutationResult {
  double observed_delta = 0.0;  // mean(b) - mean(a)
  double p_value = 1.0;
  std::int64_t n_permutations = 0;
  Sidedness sidedness = Sidedness::two_sided;
  bool exhaustive = false;
  // All pooled values identical: the statistic carries no information and
  // p is pinned to 1.
  bool degenerate = false;
};

// Label-permutation test of mean(b) - mean(a). Monte Carlo p-values use the
// add-one correction p = (1 + #extreme) / (n_perm + 1) so p is never zero;
// exhaustive enumeration counts the observed assignment itself.
PermutationResult permutation_test(const std::vector<double>& group_a,
                                   const std::vector<double>& group_b,
                                   std::int64_t n_perm, Sidedness sidedness,
                                   std::uint64_t seed,
                                   PermutationMode mode = PermutationMode::automatic);

// Number of distinct group-A index sets; exhaustive mode enumerates these.
// Saturates at threshold + 1 to avoid overflow.
std::uint64_t permutation_assignments(std::int64_t n_a, std::int64_t n_b,
                                      std::uint64_t threshold);

struct IntervalEstimate {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  std::string method;  // bootstrap_percentile | wilson
  bool degenerate = false;
};

// Percentile bootstrap interval for the mean (or a caller-supplied statistic)
// of `samples`. A single sample yields the degenerate interval [x, x].
IntervalEstimate bootstrap_ci(const std::vector<double>& samples, std::int64_t n_boot,
                              double level, std::uint64_t seed);
IntervalEstimate bootstrap_ci(const std::vector<double>& samples, std::int64_t n_boot,
                              double level, std::uint64_t seed,
                              const std::function<double(const std::vector<double>&)>& statistic);

// Wilson score interval for a binomial proportion.
IntervalEstimate wilson_ci(std::int64_t successes, std::int64_t n, double level);

// Product-moment correlation; requires length >= 3 and nonzero variance.
double pearson_r(const std::vector<double>& xs, const std::vector<double>& ys);

double mean(const std::vector<double>& xs);
// Sample standard deviation (n - 1 denominator); 0 for n < 2.
double sample_std(const std::vector<double>& xs);

// Quantile of the standard normal via refined rational approximation
// (Newton-polished to full double precision).
double normal_quantile(double p);
double normal_cdf(double x);

}  // namespace chunkseam::stats
