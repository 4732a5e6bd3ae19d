#include "sead/core/error.hpp"
#include "sead/nn/adam.hpp"
#include "sead/nn/layers.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace sead;
using namespace sead::nn;

namespace {

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed, float scale = 1.0f) {
    Rng rng(seed);
    std::normal_distribution<float> n(0.0f, scale);
    Tensor t(std::move(shape));
    for (auto& v : t.values()) v = n(rng);
    return t;
}

double dot(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

// Central differences of L(x) = <dy, f(x)> against the analytic input and parameter gradients.
void check_gradients(const std::function<Tensor(const Tensor&)>& infer, const std::function<Tensor(const Tensor&)>& forward,
                     const std::function<Tensor(const Tensor&)>& backward, std::vector<Param*> params, Tensor x,
                     bool check_input = true) {
    const Tensor y = forward(x);
    const Tensor dy = random_tensor(y.shape(), 77);
    for (auto* p : params) p->zero_grad();
    const Tensor dx = backward(dy);
    const float h = 1e-2f;
    auto loss = [&](const Tensor& xin) { return dot(dy, infer(xin)); };
    auto compare = [](double num, double ana) {
        CHECK(std::abs(num - ana) <= 2e-2 * std::max(1.0, std::abs(num)));
    };
    Rng rng(5);
    if (check_input) {
        for (int t = 0; t < 12; ++t) {
            const std::size_t i = uniform_index(rng, x.size());
            Tensor xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            compare((loss(xp) - loss(xm)) / (2 * h), dx[i]);
        }
    }
    for (auto* p : params) {
        for (int t = 0; t < 8; ++t) {
            const std::size_t i = uniform_index(rng, p->value.size());
            const float keep = p->value[i];
            p->value[i] = keep + h;
            const double lp = loss(x);
            p->value[i] = keep - h;
            const double lm = loss(x);
            p->value[i] = keep;
            compare((lp - lm) / (2 * h), p->grad[i]);
        }
    }
}

template <typename L>
void check_layer(L& layer, Tensor x, bool check_input = true) {
    std::vector<Param*> params;
    layer.collect(params);
    check_gradients([&](const Tensor& t) { return layer.infer(t); }, [&](const Tensor& t) { return layer.forward(t); },
                    [&](const Tensor& t) { return layer.backward(t); }, params, std::move(x), check_input);
}

} // namespace

TEST_CASE("conv3d: gradients") {
    Conv3d conv("c", 2, 3, 3, 2, 1);
    Rng rng(1);
    conv.init(rng);
    check_layer(conv, random_tensor({2, 2, 4, 6, 4}, 2));
}

TEST_CASE("conv3d: stride 1 output size") {
    Conv3d conv("c", 1, 1, 3, 1, 1);
    Rng rng(1);
    conv.init(rng);
    const auto y = conv.infer(random_tensor({1, 1, 5, 4, 3}, 3));
    CHECK(y.shape() == std::vector<int>{1, 1, 5, 4, 3});
    CHECK(conv_out_size(32, 3, 2, 1) == 16);
}

TEST_CASE("conv transpose: gradients") {
    ConvTranspose3d up("u", 3, 2, 3, 2, 1, 1);
    Rng rng(2);
    up.init(rng);
    const auto x = random_tensor({2, 3, 2, 3, 2}, 4);
    CHECK(up.infer(x).shape() == std::vector<int>{2, 2, 4, 6, 4});
    check_layer(up, x);
}

TEST_CASE("conv transpose is the adjoint of conv") {
    Conv3d conv("c", 2, 3, 3, 2, 1);
    ConvTranspose3d up("u", 3, 2, 3, 2, 1, 1);
    Rng rng(3);
    conv.init(rng);
    std::vector<Param*> pc, pu;
    conv.collect(pc);
    up.collect(pu);
    // identical (out, in*k^3) layouts; zero both biases
    pu[0]->value = pc[0]->value;
    pc[1]->value.fill(0.0f);
    pu[1]->value.fill(0.0f);
    const auto x = random_tensor({1, 2, 4, 4, 6}, 8);
    const auto y = random_tensor({1, 3, 2, 2, 3}, 9);
    const double lhs = dot(conv.infer(x), y);
    const double rhs = dot(x, up.infer(y));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
}

TEST_CASE("group norm: gradients and normalisation") {
    GroupNorm gn("g", 4, 2);
    Rng rng(1);
    gn.init(rng);
    std::vector<Param*> p;
    gn.collect(p);
    for (auto* q : p)
        for (auto& v : q->value.values()) v += 0.3f * static_cast<float>(uniform_index(rng, 5)) - 0.6f;
    check_layer(gn, random_tensor({2, 4, 2, 3, 2}, 6, 2.0f));

    GroupNorm plain("g", 4, 2);
    plain.init(rng);
    const auto y = plain.infer(random_tensor({1, 4, 2, 2, 2}, 7, 3.0f));
    double m = 0.0;
    for (int i = 0; i < 16; ++i) m += y[i];
    CHECK(m / 16 == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("activations: gradients") {
    SiLU silu;
    check_layer(silu, random_tensor({3, 5}, 1));
    Sigmoid sig;
    check_layer(sig, random_tensor({3, 5}, 2));
}

TEST_CASE("linear: gradients") {
    Linear lin("l", 6, 4);
    Rng rng(4);
    lin.init(rng);
    check_layer(lin, random_tensor({3, 6}, 5));
}

TEST_CASE("branched linear: gradients and routing") {
    BranchedLinear bl("b", 5, 3, 3);
    Rng rng(4);
    bl.init(rng);
    const std::vector<int> branch{0, 2, 2, 1};
    std::vector<Param*> params;
    bl.collect(params);
    CHECK(params.size() == 6);
    CHECK(bl.branch_param_count() == 5 * 3 + 3);
    check_gradients([&](const Tensor& t) { return bl.infer(t, branch); }, [&](const Tensor& t) { return bl.forward(t, branch); },
                    [&](const Tensor& t) { return bl.backward(t); }, params, random_tensor({4, 5}, 6));
    // a row only depends on its own branch
    auto x = random_tensor({1, 5}, 7);
    const auto before = bl.infer(x, {1});
    for (auto& v : bl.weight(0).value.values()) v += 1.0f;
    CHECK(bl.infer(x, {1}).storage() == before.storage());
    CHECK_THROWS_AS(bl.infer(x, {3}), Error);
}

TEST_CASE("pool and reshape: gradients") {
    GlobalAvgPool pool;
    check_layer(pool, random_tensor({2, 3, 2, 2, 2}, 1));
    Reshape r({2, 3});
    check_layer(r, random_tensor({2, 6}, 2));
}

TEST_CASE("sequential: infer matches forward") {
    Sequential s;
    s.add<Conv3d>("c", 1, 2, 3, 2, 1);
    s.add<GroupNorm>("g", 2, 2);
    s.add<SiLU>();
    s.add<Reshape>(std::vector<int>{2 * 8});
    s.add<Linear>("l", 16, 3);
    Rng rng(9);
    s.init(rng);
    const auto x = random_tensor({2, 1, 4, 4, 4}, 3);
    CHECK(s.infer(x).storage() == s.forward(x).storage());
    check_layer(s, x);
}

TEST_CASE("softmax rows sum to one") {
    const auto p = softmax_rows(random_tensor({4, 5}, 1, 10.0f));
    for (int r = 0; r < 4; ++r) {
        double s = 0.0;
        for (int k = 0; k < 5; ++k) s += p[static_cast<std::size_t>(r) * 5 + k];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("adam: first step moves each coordinate by lr against the gradient sign") {
    Param p("p", {3});
    p.value.storage() = {1.0f, -2.0f, 0.5f};
    p.grad.storage() = {0.3f, -4.0f, 1e-3f};
    Adam opt(0.1);
    opt.step({&p});
    CHECK(p.value[0] == doctest::Approx(0.9).epsilon(1e-5));
    CHECK(p.value[1] == doctest::Approx(-1.9).epsilon(1e-5));
    CHECK(p.value[2] == doctest::Approx(0.4).epsilon(1e-4));
}

TEST_CASE("adam: minimises a quadratic") {
    Param p("p", {2});
    p.value.storage() = {3.0f, -2.0f};
    Adam opt(0.05);
    for (int t = 0; t < 500; ++t) {
        for (int i = 0; i < 2; ++i) p.grad[i] = 2.0f * p.value[i];
        opt.step({&p});
    }
    CHECK(std::abs(p.value[0]) < 0.05);
    CHECK(std::abs(p.value[1]) < 0.05);
}
