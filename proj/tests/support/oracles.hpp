#pragma once

// Reference computations used by the tests. Written from the textbook definitions and
// deliberately sharing no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

// Number of eigenvalues of the symmetric matrix `a` strictly below x (Sylvester's law of
// inertia applied to the LDL^T factorization of a - xI).
inline int eigenvalues_below(const std::vector<std::vector<long double>>& a, long double x) {
    const std::size_t n = a.size();
    std::vector<std::vector<long double>> m = a;
    for (std::size_t i = 0; i < n; ++i) m[i][i] -= x;
    int negative = 0;
    for (std::size_t k = 0; k < n; ++k) {
        long double pivot = m[k][k];
        if (std::fabs(pivot) < 1e-30L) pivot = -1e-30L;
        if (pivot < 0) ++negative;
        for (std::size_t i = k + 1; i < n; ++i) {
            const long double f = m[i][k] / pivot;
            for (std::size_t j = k + 1; j < n; ++j) m[i][j] -= f * m[k][j];
        }
    }
    return negative;
}

// Second-smallest Laplacian eigenvalue by bisection on the eigenvalue count.
inline double laplacian_lambda2(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<long double>> l(n, std::vector<long double>(n, 0.0L));
    std::set<std::pair<int, int>> unique;
    for (auto [a, b] : edges) unique.emplace(std::min(a, b), std::max(a, b));
    for (auto [a, b] : unique) {
        l[a][b] -= 1;
        l[b][a] -= 1;
        l[a][a] += 1;
        l[b][b] += 1;
    }
    long double lo = -1.0L;
    long double hi = 2.0L * n + 1.0L;
    for (int it = 0; it < 200; ++it) {
        const long double mid = (lo + hi) / 2;
        if (eigenvalues_below(l, mid) >= 2) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return static_cast<double>((lo + hi) / 2);
}

// Longest path (counted in nodes) by enumerating every path from every node.
inline int longest_path_nodes(const std::set<int>& nodes, const std::vector<std::pair<int, int>>& edges) {
    if (nodes.empty()) return 0;
    std::map<int, std::vector<int>> out;
    for (auto [a, b] : edges) out[a].push_back(b);
    int best = 0;
    std::function<void(int, int)> walk = [&](int v, int length) {
        best = std::max(best, length);
        for (int w : out[v]) walk(w, length + 1);
    };
    for (int v : nodes) walk(v, 1);
    return best;
}

// Gini as mean absolute difference over twice the mean.
inline double gini_pairwise(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double diff = 0.0;
    for (double a : xs) {
        for (double b : xs) diff += std::fabs(a - b);
    }
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    return diff / (2.0 * n * n * mean);
}

// Two-sided exact Mann-Whitney p-value by enumerating every split of the pooled sample.
inline double exact_rank_sum_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = pooled.size();
    const std::size_t m = a.size();
    auto u_of = [&](const std::vector<bool>& in_a) {
        double u = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_a[i]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (in_a[j]) continue;
                if (pooled[i] > pooled[j]) u += 1.0;
                else if (pooled[i] == pooled[j]) u += 0.5;
            }
        }
        return u;
    };
    std::vector<bool> observed(n, false);
    for (std::size_t i = 0; i < m; ++i) observed[i] = true;
    const double mu = static_cast<double>(m) * static_cast<double>(n - m) / 2.0;
    const double dev = std::fabs(u_of(observed) - mu);
    std::vector<bool> mask(n, false);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(m), true);
    std::size_t total = 0;
    std::size_t extreme = 0;
    do {
        ++total;
        if (std::fabs(u_of(mask) - mu) >= dev - 1e-9) ++extreme;
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return static_cast<double>(extreme) / static_cast<double>(total);
}

// Rank of x within `all`: count below plus the average position among ties.
inline double rank_by_counting(const std::vector<double>& all, double x) {
    double below = 0.0;
    double equal = 0.0;
    for (double y : all) {
        if (y < x) below += 1.0;
        if (y == x) equal += 1.0;
    }
    return below + (equal + 1.0) / 2.0;
}

// Kruskal-Wallis H with tie correction, straight from the definition.
inline double kruskal_wallis_h(const std::vector<std::vector<double>>& groups) {
    std::vector<double> all;
    for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
    const double n = static_cast<double>(all.size());
    const double mean_rank = (n + 1.0) / 2.0;
    double between = 0.0;
    for (const auto& g : groups) {
        double r = 0.0;
        for (double x : g) r += rank_by_counting(all, x);
        const double gm = r / static_cast<double>(g.size());
        between += static_cast<double>(g.size()) * (gm - mean_rank) * (gm - mean_rank);
    }
    double h = 12.0 / (n * (n + 1.0)) * between;
    std::map<double, double> ties;
    for (double x : all) ties[x] += 1.0;
    double t = 0.0;
    for (auto [_, c] : ties) t += c * c * c - c;
    const double correction = 1.0 - t / (n * n * n - n);
    return correction > 0 ? h / correction : 0.0;
}

struct TwoPass {
    double mean;
    double population_sd;
};

inline TwoPass two_pass(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

// Expected number of colliding unordered pairs when k agents pick uniformly from v roles.
inline double expected_collision_pairs(int k, int v) {
    return static_cast<double>(k) * (k - 1) / 2.0 / static_cast<double>(v);
}

}  // namespace oracle
