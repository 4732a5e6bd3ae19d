#pragma once

// Slow reference implementations used to cross-check the library. They work from pair
// counts, per-point conditional frequencies and exact integer binomials, never from the
// contingency-table formulas the library uses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

namespace oracle {

inline std::map<int, int> counts(const std::vector<int>& a) {
    std::map<int, int> c;
    for (int x : a) ++c[x];
    return c;
}

// Pair counting: 2(n11 n00 - n10 n01) / ((n11+n10)(n10+n00) + (n11+n01)(n01+n00)).
inline double ari(const std::vector<int>& t, const std::vector<int>& p) {
    double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = i + 1; j < t.size(); ++j) {
            const bool st = t[i] == t[j], sp = p[i] == p[j];
            if (st && sp) ++n11;
            else if (st) ++n10;
            else if (sp) ++n01;
            else ++n00;
        }
    }
    if (n10 == 0 && n01 == 0) return 1.0;
    return 2.0 * (n11 * n00 - n10 * n01) / ((n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00));
}

// Entropy by averaging -log frequency over points.
inline double entropy(const std::vector<int>& a) {
    const auto c = counts(a);
    const double n = static_cast<double>(a.size());
    double h = 0.0;
    for (int x : a) h -= std::log(c.at(x) / n) / n;
    return h;
}

// H(A | B) = -(1/n) sum_i log(#{j: a_j = a_i, b_j = b_i} / #{j: b_j = b_i}).
inline double conditional_entropy(const std::vector<int>& a, const std::vector<int>& b) {
    const double n = static_cast<double>(a.size());
    double h = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        int joint = 0, marg = 0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            marg += b[j] == b[i];
            joint += b[j] == b[i] && a[j] == a[i];
        }
        h -= std::log(static_cast<double>(joint) / marg) / n;
    }
    return h;
}

inline double mi(const std::vector<int>& t, const std::vector<int>& p) { return entropy(t) - conditional_entropy(t, p); }

struct Hcv {
    double h, c, v;
};

inline Hcv hcv(const std::vector<int>& t, const std::vector<int>& p) {
    const double ht = entropy(t), hp = entropy(p);
    const double h = ht == 0.0 ? 1.0 : 1.0 - conditional_entropy(t, p) / ht;
    const double c = hp == 0.0 ? 1.0 : 1.0 - conditional_entropy(p, t) / hp;
    const double v = h + c == 0.0 ? 0.0 : 2.0 * h * c / (h + c);
    return {h, c, v};
}

inline std::uint64_t binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

// Expected MI under the permutation model, hypergeometric weights from exact binomials.
inline double emi(const std::vector<int>& t, const std::vector<int>& p) {
    const int n = static_cast<int>(t.size());
    double e = 0.0;
    for (const auto& [ci, a] : counts(t)) {
        for (const auto& [kj, b] : counts(p)) {
            for (int nij = std::max(1, a + b - n); nij <= std::min(a, b); ++nij) {
                const double prob = static_cast<double>(binom(a, nij)) * static_cast<double>(binom(n - a, b - nij)) /
                                    static_cast<double>(binom(n, b));
                e += prob * nij / n * std::log(static_cast<double>(n) * nij / (static_cast<double>(a) * b));
            }
        }
    }
    return e;
}

// Arithmetic normalisation; a single class and a single cluster score 1.
inline double ami(const std::vector<int>& t, const std::vector<int>& p) {
    if (counts(t).size() == 1 && counts(p).size() == 1) return 1.0;
    const double m = mi(t, p), e = emi(t, p);
    double d = 0.5 * (entropy(t) + entropy(p)) - e;
    const double eps = std::numeric_limits<double>::epsilon();
    d = d < 0 ? std::min(d, -eps) : std::max(d, eps);
    return (m - e) / d;
}

} // namespace oracle
