#pragma once

#include <span>
#include <vector>

namespace agentorg::stats {

struct Summary {
    double mean = 0.0;
    double sd = 0.0;  // population standard deviation (n denominator)
    double cv = 0.0;  // sd / mean
    double min = 0.0;
    double max = 0.0;
};

// Throws empty_series for no data and undefined_metric when the mean is 0.
Summary summarize(std::span<const double> series);

double mean(std::span<const double> xs);
// Sample variance (n - 1 denominator); 0 for fewer than two values.
double sample_variance(std::span<const double> xs);

// Midranks (1-based) of the values, ties share the average rank.
std::vector<double> midranks(std::span<const double> values);

// Regularized lower/upper incomplete gamma P(a, x), Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);
// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

double chi_square_sf(double x, double dof);
double normal_sf(double z);
double student_t_two_sided(double t, double dof);

struct KruskalWallis {
    double H = 0.0;
    double p = 1.0;
    int dof = 0;
};

// Tie-corrected H with a chi-square(k - 1) p-value. Needs >= 2 non-empty groups and >= 5
// observations (precondition_error otherwise).
KruskalWallis kruskal_wallis(const std::vector<std::vector<double>>& groups);

// (mean(a) - mean(b)) / pooled SD (n - 1 denominators). Each sample needs >= 2 values.
// Throws infinite_effect when the pooled SD is 0 but the means differ.
double cohens_d(std::span<const double> a, std::span<const double> b);

struct RankSum {
    double U = 0.0;  // Mann-Whitney U of sample a
    double p = 1.0;  // two-sided
    bool exact = false;
};

// Exact permutation distribution (ties included) when min(n_a, n_b) < 8, otherwise the
// tie-corrected normal approximation with continuity correction.
RankSum rank_sum_test(std::span<const double> a, std::span<const double> b);

struct WelchT {
    double t = 0.0;
    double dof = 0.0;
    double p = 1.0;
};

WelchT welch_t_test(std::span<const double> a, std::span<const double> b);

inline double bonferroni_alpha(double alpha, int comparisons) { return alpha / comparisons; }

// Kolmogorov-Smirnov distance between the empirical CDF of `values` and U(0, 1).
double ks_uniform_distance(std::vector<double> values);

}  // namespace agentorg::stats
