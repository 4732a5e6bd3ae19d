#include "sead/eval/metrics.hpp"

#include "sead/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace sead::eval {

double rmse(const Volume& x, const Volume& y) {
    require(x.shape() == y.shape(), ErrorCode::InvalidArgument,
            "rmse: shape mismatch " + to_string(x.shape()) + " vs " + to_string(y.shape()));
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = static_cast<double>(x.values()[i]) - y.values()[i];
        sse += d * d;
    }
    return std::sqrt(sse / static_cast<double>(x.size()));
}

namespace {

// Summed-volume table with one voxel of zero padding on each leading face.
class SummedVolume {
public:
    template <typename F>
    SummedVolume(const Shape3& s, F value) : D(s.depth + 1), H(s.height + 1), W(s.width + 1), t_(D * H * W, 0.0) {
        for (int d = 1; d < D; ++d)
            for (int h = 1; h < H; ++h)
                for (int w = 1; w < W; ++w)
                    at(d, h, w) = value(d - 1, h - 1, w - 1) + at(d - 1, h, w) + at(d, h - 1, w) + at(d, h, w - 1) -
                                  at(d - 1, h - 1, w) - at(d - 1, h, w - 1) - at(d, h - 1, w - 1) +
                                  at(d - 1, h - 1, w - 1);
    }
    // Sum over [d, d+n) x [h, h+n) x [w, w+n).
    double box(int d, int h, int w, int n) const {
        const int d1 = d + n, h1 = h + n, w1 = w + n;
        return get(d1, h1, w1) - get(d, h1, w1) - get(d1, h, w1) - get(d1, h1, w) + get(d, h, w1) + get(d, h1, w) +
               get(d1, h, w) - get(d, h, w);
    }

private:
    double& at(int d, int h, int w) { return t_[(static_cast<std::size_t>(d) * H + h) * W + w]; }
    double get(int d, int h, int w) const { return t_[(static_cast<std::size_t>(d) * H + h) * W + w]; }
    int D, H, W;
    std::vector<double> t_;
};

} // namespace

double ssim3d(const Volume& x, const Volume& y, const SsimParams& p) {
    require(x.shape() == y.shape(), ErrorCode::InvalidArgument,
            "ssim3d: shape mismatch " + to_string(x.shape()) + " vs " + to_string(y.shape()));
    const auto& s = x.shape();
    const int n = p.window;
    require(n >= 2 && s.depth >= n && s.height >= n && s.width >= n, ErrorCode::InvalidArgument,
            "ssim3d: volume " + to_string(s) + " is smaller than the " + std::to_string(n) + "^3 window");
    const double c1 = (p.k1 * p.data_range) * (p.k1 * p.data_range);
    const double c2 = (p.k2 * p.data_range) * (p.k2 * p.data_range);

    auto X = [&](int d, int h, int w) { return static_cast<double>(x.at(d, h, w)); };
    auto Y = [&](int d, int h, int w) { return static_cast<double>(y.at(d, h, w)); };
    const SummedVolume sx(s, X), sy(s, Y);
    const SummedVolume sxx(s, [&](int d, int h, int w) { return X(d, h, w) * X(d, h, w); });
    const SummedVolume syy(s, [&](int d, int h, int w) { return Y(d, h, w) * Y(d, h, w); });
    const SummedVolume sxy(s, [&](int d, int h, int w) { return X(d, h, w) * Y(d, h, w); });

    const double np = static_cast<double>(n) * n * n;
    const double cov_norm = np / (np - 1.0);
    double total = 0.0;
    std::size_t count = 0;
    for (int d = 0; d + n <= s.depth; ++d) {
        for (int h = 0; h + n <= s.height; ++h) {
            for (int w = 0; w + n <= s.width; ++w) {
                const double mx = sx.box(d, h, w, n) / np;
                const double my = sy.box(d, h, w, n) / np;
                const double vx = cov_norm * (sxx.box(d, h, w, n) / np - mx * mx);
                const double vy = cov_norm * (syy.box(d, h, w, n) / np - my * my);
                const double cxy = cov_norm * (sxy.box(d, h, w, n) / np - mx * my);
                const double num = (2.0 * mx * my + c1) * (2.0 * cxy + c2);
                const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
                total += num / den;
                ++count;
            }
        }
    }
    return total / static_cast<double>(count);
}

double macro_f1(std::span<const int> y_true, std::span<const int> y_pred) {
    require(!y_true.empty(), ErrorCode::InvalidArgument, "macro_f1: empty input");
    require(y_true.size() == y_pred.size(), ErrorCode::InvalidArgument, "macro_f1: length mismatch");
    std::set<int> classes(y_true.begin(), y_true.end());
    classes.insert(y_pred.begin(), y_pred.end());
    double sum = 0.0;
    for (int c : classes) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            const bool t = y_true[i] == c, q = y_pred[i] == c;
            tp += t && q;
            fp += !t && q;
            fn += t && !q;
        }
        const double denom = 2.0 * tp + fp + fn;
        sum += denom > 0 ? 2.0 * tp / denom : 0.0;
    }
    return sum / static_cast<double>(classes.size());
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) return {};
    double m = 0.0;
    for (double v : values) m += v;
    m /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - m) * (v - m);
    return {m, std::sqrt(var / static_cast<double>(values.size()))};
}

} // namespace sead::eval
