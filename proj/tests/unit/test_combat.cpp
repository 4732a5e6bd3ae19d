#include "helpers.hpp"

#include "sead/combat/combat.hpp"
#include "sead/core/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace sead;
using namespace sead::combat;

namespace {

struct Data {
    std::vector<double> x; // N x L
    std::vector<int> batch;
    int n = 0;
    int L = 0;
};

// Batch b shifts feature j by shift[b] * (1 + 0.1 j) and scales it by scale[b].
Data make_data(const std::vector<int>& sizes, int L, const std::vector<double>& shift, const std::vector<double>& scale,
               std::uint64_t seed) {
    Data d;
    d.L = L;
    Rng rng(seed);
    std::normal_distribution<double> n01;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        for (int i = 0; i < sizes[b]; ++i) {
            for (int j = 0; j < L; ++j) d.x.push_back(5.0 + 0.3 * j + shift[b] * (1.0 + 0.1 * j) + scale[b] * n01(rng));
            d.batch.push_back(static_cast<int>(b) * 3 + 1); // non-contiguous ids
            ++d.n;
        }
    }
    return d;
}

struct Moments {
    double mean = 0.0, var = 0.0; // sample variance
};

Moments batch_moments(const std::vector<double>& x, const std::vector<int>& batch, int L, int b, int j) {
    std::vector<double> v;
    for (std::size_t i = 0; i < batch.size(); ++i)
        if (batch[i] == b) v.push_back(x[i * L + j]);
    Moments m;
    for (double e : v) m.mean += e / v.size();
    for (double e : v) m.var += (e - m.mean) * (e - m.mean) / (v.size() - 1);
    return m;
}

} // namespace

TEST_CASE("single batch is the identity") {
    const auto d = make_data({30}, 4, {0.0}, {1.0}, 1);
    for (bool eb : {false, true}) {
        const auto m = combat_fit(d.x, d.L, {d.batch, {}, 0}, eb);
        const auto y = combat_apply(m, d.x, d.batch);
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y[i] - d.x[i]) < 1e-6);
    }
}

TEST_CASE("no shrinkage: batch moments match the pooled targets") {
    const auto d = make_data({40, 25}, 6, {0.0, 3.0}, {1.0, 2.5}, 2);
    const auto m = combat_fit(d.x, d.L, {d.batch, {}, 0}, false);
    const auto y = combat_apply(m, d.x, d.batch);
    for (int j = 0; j < d.L; ++j) {
        // oracle: grand mean over all rows, pooled within-batch variance with N - B dof
        double grand = 0.0;
        for (int i = 0; i < d.n; ++i) grand += d.x[i * d.L + j] / d.n;
        double ss = 0.0;
        for (int b : {1, 4}) {
            const auto bm = batch_moments(d.x, d.batch, d.L, b, j);
            for (int i = 0; i < d.n; ++i)
                if (d.batch[i] == b) ss += std::pow(d.x[i * d.L + j] - bm.mean, 2);
        }
        const double pooled = ss / (d.n - 2);
        for (int b : {1, 4}) {
            const auto after = batch_moments(y, d.batch, d.L, b, j);
            CHECK(std::abs(after.mean - grand) < 1e-8);
            CHECK(std::abs(after.var - pooled) < 1e-6);
        }
    }
}

TEST_CASE("empirical Bayes removes most of the mean gap") {
    const auto d = make_data({50, 50}, 20, {0.0, 2.0}, {1.0, 1.5}, 3);
    const auto m = combat_fit(d.x, d.L, {d.batch, {}, 0}, true);
    CHECK(m.iterations >= 1);
    const auto y = combat_apply(m, d.x, d.batch);
    double before = 0.0, after = 0.0;
    for (int j = 0; j < d.L; ++j) {
        before += std::abs(batch_moments(d.x, d.batch, d.L, 1, j).mean - batch_moments(d.x, d.batch, d.L, 4, j).mean);
        after += std::abs(batch_moments(y, d.batch, d.L, 1, j).mean - batch_moments(y, d.batch, d.L, 4, j).mean);
    }
    CHECK(after <= 0.1 * before);
}

TEST_CASE("covariate effects survive harmonization") {
    // a binary covariate adds +2 to every feature; it is unbalanced across batches
    auto d = make_data({40, 40}, 5, {0.0, 1.5}, {1.0, 1.0}, 4);
    std::vector<double> cov(d.n);
    for (int i = 0; i < d.n; ++i) {
        cov[i] = (i % 5 == 0 || (d.batch[i] == 4 && i % 2 == 0)) ? 1.0 : 0.0;
        for (int j = 0; j < d.L; ++j) d.x[i * d.L + j] += 2.0 * cov[i];
    }
    const auto m = combat_fit(d.x, d.L, {d.batch, cov, 1}, false);
    const auto y = combat_apply(m, d.x, d.batch, cov);
    for (int j = 0; j < d.L; ++j) {
        double on = 0, off = 0;
        int non = 0, noff = 0;
        for (int i = 0; i < d.n; ++i) (cov[i] > 0 ? (on += y[i * d.L + j], ++non) : (off += y[i * d.L + j], ++noff));
        CHECK(on / non - off / noff == doctest::Approx(2.0).epsilon(0.25));
    }
    CHECK_THROWS_AS(combat_apply(m, d.x, d.batch), Error);
}

TEST_CASE("combat errors") {
    const auto d = make_data({10, 10}, 3, {0.0, 1.0}, {1.0, 1.0}, 5);
    const auto m = combat_fit(d.x, d.L, {d.batch, {}, 0});
    std::vector<int> unseen = d.batch;
    unseen[3] = 99;
    try {
        combat_apply(m, d.x, unseen);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("99") != std::string::npos);
    }

    auto single = d;
    single.batch.back() = 42; // a batch with one row
    CHECK_THROWS_AS(combat_fit(single.x, single.L, {single.batch, {}, 0}), Error);

    auto flat = d;
    for (int i = 0; i < flat.n; ++i) flat.x[i * flat.L + 1] = 7.0;
    try {
        combat_fit(flat.x, flat.L, {flat.batch, {}, 0});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Numeric);
    }

    // a covariate equal to a batch indicator makes the design rank deficient
    std::vector<double> cov(d.n);
    for (int i = 0; i < d.n; ++i) cov[i] = d.batch[i] == 1 ? 1.0 : 0.0;
    CHECK_THROWS_AS(combat_fit(d.x, d.L, {d.batch, cov, 1}), Error);
    CHECK_THROWS_AS(combat_fit(d.x, d.L + 1, {d.batch, {}, 0}), Error);
}

TEST_CASE("row and feature permutations commute with harmonization") {
    const auto d = make_data({20, 30, 15}, 8, {0.0, 1.0, -1.0}, {1.0, 2.0, 0.5}, 6);
    const auto m = combat_fit(d.x, d.L, {d.batch, {}, 0}, true);
    const auto y = combat_apply(m, d.x, d.batch);

    std::vector<int> perm(d.n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(1);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> xr;
    std::vector<int> br;
    for (int i : perm) {
        xr.insert(xr.end(), d.x.begin() + i * d.L, d.x.begin() + (i + 1) * d.L);
        br.push_back(d.batch[i]);
    }
    const auto yr = combat_apply(combat_fit(xr, d.L, {br, {}, 0}, true), xr, br);
    for (int r = 0; r < d.n; ++r)
        for (int j = 0; j < d.L; ++j) CHECK(std::abs(yr[r * d.L + j] - y[perm[r] * d.L + j]) < 1e-9);

    std::vector<int> fperm(d.L);
    std::iota(fperm.begin(), fperm.end(), 0);
    std::shuffle(fperm.begin(), fperm.end(), rng);
    std::vector<double> xf(d.x.size());
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.L; ++j) xf[i * d.L + j] = d.x[i * d.L + fperm[j]];
    const auto yf = combat_apply(combat_fit(xf, d.L, {d.batch, {}, 0}, true), xf, d.batch);
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.L; ++j) CHECK(std::abs(yf[i * d.L + j] - y[i * d.L + fperm[j]]) < 1e-9);
}

TEST_CASE("model JSON round trip") {
    const auto d = make_data({12, 14}, 4, {0.0, 1.0}, {1.0, 1.3}, 7);
    const auto m = combat_fit(d.x, d.L, {d.batch, {}, 0});
    CHECK(combat_from_json(combat_to_json(m)) == m);
    const auto dir = testutil::temp_dir("combat");
    save_combat(dir / "m.json", m);
    CHECK(load_combat(dir / "m.json") == m);
    CHECK_THROWS_AS(combat_from_json("{\"num_features\": 2}"), Error);
    CHECK_THROWS_AS(combat_from_json("not json"), Error);
    std::filesystem::remove_all(dir);
}
