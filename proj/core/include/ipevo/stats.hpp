#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ipevo::stats {

// One statistical verification result
struct TestReport {
    std::string test_id;
    double alpha = 0;
    std::string params;
    std::size_t n = 0;
    double statistic = 0;
    std::string reference;
    std::optional<double> p_value;
    std::optional<double> z_score;
    double threshold = 1e-3; // p > threshold, or |z| < z_threshold = 3
    bool pass = false;
    bool informational = false; // report-only probes: pass is not asserted
    std::uint64_t seed = 0;
    double runtime_ms = 0;
};

struct KsResult {
    double d = 0;
    double p = 0;
    std::size_t n = 0;
    bool discrete_fallback = false; // heavy ties: chi-square homogeneity used
};

// one-sample KS against a CDF; switches to a discrete chi-square GOF when
// more than half of the sample is tied
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);
// two-sample KS (chi-square homogeneity under heavy ties)
KsResult ks_test_2(std::vector<double> a, std::vector<double> b);

// z statistic for an observed proportion against p0
double binomial_z(std::size_t successes, std::size_t n, double p0);

// chi-square GOF p-value for observed counts vs expected (merges bins with
// expected < 5); dof reduced by `fitted` parameters
double chi2_gof_p(const std::vector<double>& observed, const std::vector<double>& expected,
                  std::size_t fitted = 0);

struct LaplacePoint {
    double lambda;
    double mean;
    double se; // jackknife standard error
};
std::vector<LaplacePoint> empirical_laplace(const std::vector<double>& sample,
                                            const std::vector<double>& lambdas);

// distance correlation with a permutation p-value (pairs subsampled to at
// most max_n for the O(n^2) double-centering)
struct DcorResult {
    double dcor = 0;
    double p = 0;
    std::size_t n = 0;
};
DcorResult dcor_permutation_test(std::vector<double> x, std::vector<double> y,
                                 std::uint64_t seed, std::size_t n_perm = 199,
                                 std::size_t max_n = 1500);

// Holm step-down adjustment of p-values (two-sided pass at the given level)
std::vector<double> holm_adjust(const std::vector<double>& p_values);

double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

} // namespace ipevo::stats
