#pragma once

#include "sead/core/volume.hpp"

#include <span>
#include <vector>

namespace sead::eval {

double rmse(const Volume& x, const Volume& y);

struct SsimParams {
    int window = 7;
    double data_range = 1.0;
    double k1 = 0.01;
    double k2 = 0.03;
};

// Mean SSIM over every fully contained window x window x window cube (stride 1),
// uniform weights, sample (N-1) covariance.
double ssim3d(const Volume& x, const Volume& y, const SsimParams& params = {});

// Unweighted mean of per-class F1 over the union of classes in y_true and y_pred.
double macro_f1(std::span<const int> y_true, std::span<const int> y_pred);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; // population
    bool operator==(const MeanStd&) const = default;
};
MeanStd mean_std(std::span<const double> values);

} // namespace sead::eval
