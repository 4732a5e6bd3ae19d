#include "sead/eval/clustering.hpp"

#include "sead/core/error.hpp"
#include "sead/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace sead::eval {

namespace {

double sqdist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void check_labels(std::span<const int> a, std::span<const int> b) {
    require(a.size() == b.size(), ErrorCode::InvalidArgument, "label vectors differ in length");
    require(!a.empty(), ErrorCode::InvalidArgument, "label vectors are empty");
}

// Dense contingency table plus its marginals.
struct Contingency {
    std::vector<std::vector<long>> n; // classes x clusters
    std::vector<long> a, b;
    long total = 0;
};

Contingency contingency(std::span<const int> t, std::span<const int> p) {
    check_labels(t, p);
    std::map<int, int> ct, cp;
    for (int v : t) ct.emplace(v, 0);
    for (int v : p) cp.emplace(v, 0);
    int i = 0;
    for (auto& kv : ct) kv.second = i++;
    i = 0;
    for (auto& kv : cp) kv.second = i++;
    Contingency c;
    c.n.assign(ct.size(), std::vector<long>(cp.size(), 0));
    c.a.assign(ct.size(), 0);
    c.b.assign(cp.size(), 0);
    for (std::size_t s = 0; s < t.size(); ++s) {
        const int r = ct[t[s]], q = cp[p[s]];
        ++c.n[r][q];
        ++c.a[r];
        ++c.b[q];
    }
    c.total = static_cast<long>(t.size());
    return c;
}

double entropy(const std::vector<long>& counts, long total) {
    double h = 0.0;
    for (long c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return h;
}

double mi_of(const Contingency& c) {
    const double N = static_cast<double>(c.total);
    double mi = 0.0;
    for (std::size_t i = 0; i < c.a.size(); ++i)
        for (std::size_t j = 0; j < c.b.size(); ++j) {
            const double nij = static_cast<double>(c.n[i][j]);
            if (nij == 0) continue;
            mi += nij / N * std::log(N * nij / (static_cast<double>(c.a[i]) * static_cast<double>(c.b[j])));
        }
    return std::max(mi, 0.0);
}

double emi_of(const Contingency& c) {
    const long N = c.total;
    const double Nd = static_cast<double>(N);
    const double lgN = std::lgamma(Nd + 1);
    double emi = 0.0;
    for (long ai : c.a)
        for (long bj : c.b) {
            const long lo = std::max<long>(1, ai + bj - N);
            const long hi = std::min(ai, bj);
            const double base = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) + std::lgamma(Nd - ai + 1) +
                                std::lgamma(Nd - bj + 1) - lgN;
            for (long nij = lo; nij <= hi; ++nij) {
                const double lp = base - std::lgamma(nij + 1.0) - std::lgamma(ai - nij + 1.0) -
                                  std::lgamma(bj - nij + 1.0) - std::lgamma(Nd - ai - bj + nij + 1);
                const double x = static_cast<double>(nij);
                emi += x / Nd * std::log(Nd * x / (static_cast<double>(ai) * static_cast<double>(bj))) * std::exp(lp);
            }
        }
    return emi;
}

} // namespace

KMeansResult kmeans(const Points& pts, int k, int restarts, std::uint64_t seed, int max_iter) {
    require(k >= 1 && k <= pts.n, ErrorCode::InvalidArgument,
            "kmeans: k=" + std::to_string(k) + " must lie in [1, " + std::to_string(pts.n) + "]");
    require(restarts >= 1, ErrorCode::InvalidArgument, "kmeans: restarts must be >= 1");
    const int n = pts.n, D = pts.dim;
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, 0x6b6d65616e73ULL, static_cast<std::uint64_t>(r)));
        std::vector<double> cent(static_cast<std::size_t>(k) * D);
        auto crow = [&](int c) { return std::span<double>(cent).subspan(static_cast<std::size_t>(c) * D, D); };
        // k-means++ seeding
        int first = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        std::copy_n(pts.row(first).begin(), D, crow(0).begin());
        std::vector<double> d2(n);
        for (int i = 0; i < n; ++i) d2[i] = sqdist(pts.row(i), crow(0));
        for (int c = 1; c < k; ++c) {
            double tot = 0.0;
            for (double v : d2) tot += v;
            int pick = 0;
            if (tot <= 0.0) {
                pick = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
            } else {
                const double u = std::uniform_real_distribution<double>(0.0, tot)(rng);
                double acc = 0.0;
                pick = n - 1;
                for (int i = 0; i < n; ++i) {
                    acc += d2[i];
                    if (u < acc) { pick = i; break; }
                }
            }
            std::copy_n(pts.row(pick).begin(), D, crow(c).begin());
            for (int i = 0; i < n; ++i) d2[i] = std::min(d2[i], sqdist(pts.row(i), crow(c)));
        }
        std::vector<int> lab(n, -1);
        double inertia = 0.0;
        for (int it = 0; it < max_iter; ++it) {
            bool changed = false;
            inertia = 0.0;
            for (int i = 0; i < n; ++i) {
                int arg = 0;
                double bd = std::numeric_limits<double>::infinity();
                for (int c = 0; c < k; ++c) {
                    const double d = sqdist(pts.row(i), crow(c));
                    if (d < bd) { bd = d; arg = c; }
                }
                if (lab[i] != arg) { lab[i] = arg; changed = true; }
                inertia += bd;
            }
            if (!changed && it > 0) break;
            std::vector<double> sum(cent.size(), 0.0);
            std::vector<int> cnt(k, 0);
            for (int i = 0; i < n; ++i) {
                ++cnt[lab[i]];
                const auto p = pts.row(i);
                for (int j = 0; j < D; ++j) sum[static_cast<std::size_t>(lab[i]) * D + j] += p[j];
            }
            for (int c = 0; c < k; ++c) {
                if (cnt[c] == 0) {
                    // empty cluster: move it onto the point farthest from its centroid
                    int far = 0;
                    double fd = -1.0;
                    for (int i = 0; i < n; ++i) {
                        const double d = sqdist(pts.row(i), crow(lab[i]));
                        if (d > fd) { fd = d; far = i; }
                    }
                    std::copy_n(pts.row(far).begin(), D, crow(c).begin());
                    continue;
                }
                for (int j = 0; j < D; ++j) crow(c)[j] = sum[static_cast<std::size_t>(c) * D + j] / cnt[c];
            }
        }
        if (inertia < best.inertia) {
            best.inertia = inertia;
            best.labels = lab;
        }
    }
    return best;
}

double silhouette_score(const Points& pts, std::span<const int> labels) {
    require(static_cast<int>(labels.size()) == pts.n, ErrorCode::InvalidArgument, "silhouette: label count mismatch");
    std::map<int, int> idx;
    for (int l : labels) idx.emplace(l, 0);
    const int K = static_cast<int>(idx.size());
    require(K >= 2 && K <= pts.n - 1, ErrorCode::Precondition,
            "silhouette: number of labels is " + std::to_string(K) + ", needs 2..n-1");
    int c = 0;
    for (auto& kv : idx) kv.second = c++;
    std::vector<int> lab(pts.n), size(K, 0);
    for (int i = 0; i < pts.n; ++i) {
        lab[i] = idx[labels[i]];
        ++size[lab[i]];
    }
    double total = 0.0;
    std::vector<double> sums(K);
    for (int i = 0; i < pts.n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (int j = 0; j < pts.n; ++j) {
            if (j == i) continue;
            sums[lab[j]] += std::sqrt(sqdist(pts.row(i), pts.row(j)));
        }
        if (size[lab[i]] <= 1) continue;
        const double a = sums[lab[i]] / (size[lab[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int q = 0; q < K; ++q)
            if (q != lab[i]) b = std::min(b, sums[q] / size[q]);
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / pts.n;
}

HCV homogeneity_completeness_v(std::span<const int> t, std::span<const int> p) {
    const Contingency c = contingency(t, p);
    const double hc = entropy(c.a, c.total), hk = entropy(c.b, c.total);
    const double mi = mi_of(c);
    HCV r;
    r.homogeneity = hc > 0.0 ? mi / hc : 1.0;
    r.completeness = hk > 0.0 ? mi / hk : 1.0;
    const double s = r.homogeneity + r.completeness;
    r.v_measure = s > 0.0 ? 2.0 * r.homogeneity * r.completeness / s : 0.0;
    return r;
}

double adjusted_rand_index(std::span<const int> t, std::span<const int> p) {
    const Contingency c = contingency(t, p);
    auto c2 = [](long x) { return static_cast<double>(x) * static_cast<double>(x - 1) / 2.0; };
    double tp = 0.0, A = 0.0, B = 0.0;
    for (const auto& row : c.n)
        for (long v : row) tp += c2(v);
    for (long v : c.a) A += c2(v);
    for (long v : c.b) B += c2(v);
    const double T = c2(c.total);
    const double fn = A - tp, fp = B - tp, tn = T - A - B + tp;
    if (fn == 0.0 && fp == 0.0) return 1.0;
    return 2.0 * (tp * tn - fn * fp) / ((tp + fn) * (fn + tn) + (tp + fp) * (fp + tn));
}

double mutual_information(std::span<const int> t, std::span<const int> p) { return mi_of(contingency(t, p)); }

double expected_mutual_information(std::span<const int> t, std::span<const int> p) { return emi_of(contingency(t, p)); }

double adjusted_mutual_info(std::span<const int> t, std::span<const int> p) {
    const Contingency c = contingency(t, p);
    if (c.a.size() == 1 && c.b.size() == 1) return 1.0;
    const double mi = mi_of(c), emi = emi_of(c);
    const double norm = 0.5 * (entropy(c.a, c.total) + entropy(c.b, c.total));
    double den = norm - emi;
    const double eps = std::numeric_limits<double>::epsilon();
    den = den < 0.0 ? std::min(den, -eps) : std::max(den, eps);
    return (mi - emi) / den;
}

ClusteringIndices clustering_indices(const train::LdrStore& ldrs, std::uint64_t seed, const ClusteringParams& params) {
    const train::LdrStore rows = ldrs.filter([&](std::size_t i) {
        if (params.cn_only && ldrs.diseases[i] != Disease::CN) return false;
        if (params.train_domains_only && !ldrs.is_train_domain(ldrs.domains[i])) return false;
        return true;
    });
    std::map<int, int> dom;
    for (int d : rows.domains) dom.emplace(d, 0);
    require(dom.size() >= 2, ErrorCode::Precondition,
            "clustering: needs CN rows from at least 2 domains, found " + std::to_string(dom.size()));
    Points pts;
    pts.n = static_cast<int>(rows.rows());
    pts.dim = rows.latent_dim;
    pts.data.assign(rows.values.begin(), rows.values.end());
    const auto km = kmeans(pts, static_cast<int>(dom.size()), params.restarts, derive_seed_tag(seed, "clustering"));
    ClusteringIndices r;
    r.silhouette = silhouette_score(pts, rows.domains);
    const HCV h = homogeneity_completeness_v(rows.domains, km.labels);
    r.homogeneity = h.homogeneity;
    r.completeness = h.completeness;
    r.v_measure = h.v_measure;
    r.ari = adjusted_rand_index(rows.domains, km.labels);
    r.ami = adjusted_mutual_info(rows.domains, km.labels);
    return r;
}

double clustering_reduction(const ClusteringIndices& method, const ClusteringIndices& baseline) {
    const auto m = method.as_array(), b = baseline.as_array();
    double sum = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (std::abs(b[i]) < 1e-9) continue;
        sum += 100.0 * (m[i] - b[i]) / std::abs(b[i]);
        ++used;
    }
    require(used > 0, ErrorCode::Precondition, "clustering reduction: every baseline index is ~0");
    return sum / used;
}

} // namespace sead::eval
