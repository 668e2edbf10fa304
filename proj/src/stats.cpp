#include "agentorg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "agentorg/errors.hpp"

namespace agentorg::stats {

namespace {

constexpr double eps = 1e-15;
constexpr double tiny = 1e-300;
constexpr int max_iterations = 10000;

// Sum of (t^3 - t) over tie groups.
double tie_term(std::span<const double> values) {
    std::map<double, int> counts;
    for (double v : values) ++counts[v];
    double sum = 0.0;
    for (const auto& [_, t] : counts) sum += static_cast<double>(t) * t * t - t;
    return sum;
}

double gamma_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < max_iterations; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * eps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz).
double gamma_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < max_iterations; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

double mean(std::span<const double> xs) {
    if (xs.empty()) throw empty_series();
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

Summary summarize(std::span<const double> series) {
    if (series.empty()) throw empty_series();
    Summary s;
    s.mean = mean(series);
    double ss = 0.0;
    for (double x : series) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(series.size()));
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    s.min = *lo;
    s.max = *hi;
    if (s.mean == 0.0) throw undefined_metric("coefficient of variation undefined for zero mean");
    s.cv = s.sd / s.mean;
    return s;
}

std::vector<double> midranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return clamp01(gamma_series(a, x));
    return clamp01(1.0 - gamma_continued_fraction(a, x));
}

double gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    if (x < a + 1.0) return clamp01(1.0 - gamma_series(a, x));
    return clamp01(gamma_continued_fraction(a, x));
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return clamp01(front * beta_continued_fraction(a, b, x) / a);
    return clamp01(1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b);
}

double chi_square_sf(double x, double dof) { return gamma_q(dof / 2.0, x / 2.0); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double student_t_two_sided(double t, double dof) {
    if (!std::isfinite(t)) return 0.0;
    return clamp01(incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t)));
}

KruskalWallis kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw precondition_error("Kruskal-Wallis needs at least two groups");
    std::vector<double> all;
    for (const auto& g : groups) {
        if (g.empty()) throw precondition_error("Kruskal-Wallis: every group needs an observation");
        all.insert(all.end(), g.begin(), g.end());
    }
    if (all.size() < 5) throw precondition_error("Kruskal-Wallis needs at least 5 observations");

    KruskalWallis out;
    out.dof = static_cast<int>(groups.size()) - 1;
    const double n = static_cast<double>(all.size());
    const double correction = 1.0 - tie_term(all) / (n * n * n - n);
    if (correction <= 0.0) return out;  // every observation identical

    const auto ranks = midranks(all);
    double sum = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double r = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) r += ranks[offset + i];
        sum += r * r / static_cast<double>(g.size());
        offset += g.size();
    }
    const double h = (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction;
    out.H = std::max(0.0, h);
    out.p = chi_square_sf(out.H, out.dof);
    return out;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw precondition_error("Cohen's d needs at least two values per sample");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double pooled =
        std::sqrt(((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0));
    const double diff = mean(a) - mean(b);
    if (pooled == 0.0) {
        if (diff == 0.0) return 0.0;
        throw infinite_effect("Cohen's d: zero pooled standard deviation with different means");
    }
    return diff / pooled;
}

RankSum rank_sum_test(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw precondition_error("rank-sum test needs at least one value per sample");
    std::vector<double> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    const auto ranks = midranks(all);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double n = na + nb;
    const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);

    RankSum out;
    out.U = rank_sum_a - na * (na + 1.0) / 2.0;
    const double mu = na * nb / 2.0;

    if (std::min(a.size(), b.size()) < 8) {
        // Exact null distribution of the smaller sample's doubled rank sum.
        out.exact = true;
        const bool a_small = a.size() <= b.size();
        const std::size_t m = a_small ? a.size() : b.size();
        std::vector<long> doubled(ranks.size());
        for (std::size_t i = 0; i < ranks.size(); ++i) doubled[i] = std::lround(2.0 * ranks[i]);
        long observed = 0;
        const std::size_t begin = a_small ? 0 : a.size();
        for (std::size_t i = begin; i < begin + m; ++i) observed += doubled[i];

        long max_sum = 0;
        {
            auto sorted = doubled;
            std::sort(sorted.rbegin(), sorted.rend());
            for (std::size_t i = 0; i < m; ++i) max_sum += sorted[i];
        }
        std::vector<std::vector<double>> ways(m + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
        ways[0][0] = 1.0;
        for (std::size_t item = 0; item < doubled.size(); ++item) {
            const long r = doubled[item];
            for (std::size_t j = std::min(m, item + 1); j >= 1; --j) {
                auto& dst = ways[j];
                const auto& src = ways[j - 1];
                for (long s = max_sum - r; s >= 0; --s) {
                    if (src[static_cast<std::size_t>(s)] != 0.0) dst[static_cast<std::size_t>(s + r)] += src[static_cast<std::size_t>(s)];
                }
            }
        }
        const double centre = static_cast<double>(m) * (n + 1.0);  // mean of the doubled sum
        const double dev = std::abs(static_cast<double>(observed) - centre);
        double total = 0.0;
        double extreme = 0.0;
        for (long s = 0; s <= max_sum; ++s) {
            const double w = ways[m][static_cast<std::size_t>(s)];
            if (w == 0.0) continue;
            total += w;
            if (std::abs(static_cast<double>(s) - centre) >= dev - 1e-9) extreme += w;
        }
        out.p = clamp01(extreme / total);
        return out;
    }

    const double variance = na * nb / 12.0 * ((n + 1.0) - tie_term(all) / (n * (n - 1.0)));
    if (variance <= 0.0) {
        out.p = 1.0;
        return out;
    }
    const double z = std::max(0.0, std::abs(out.U - mu) - 0.5) / std::sqrt(variance);
    out.p = clamp01(2.0 * normal_sf(z));
    return out;
}

WelchT welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw precondition_error("Welch's t-test needs at least two values per sample");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = sample_variance(a) / na;
    const double vb = sample_variance(b) / nb;
    WelchT out;
    const double diff = mean(a) - mean(b);
    if (va + vb == 0.0) {
        out.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        out.dof = na + nb - 2.0;
        out.p = diff == 0.0 ? 1.0 : 0.0;
        return out;
    }
    out.t = diff / std::sqrt(va + vb);
    out.dof = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    out.p = student_t_two_sided(out.t, out.dof);
    return out;
}

double ks_uniform_distance(std::vector<double> values) {
    if (values.empty()) throw empty_series();
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = std::clamp(values[i], 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace agentorg::stats
