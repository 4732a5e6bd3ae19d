#pragma once

#include "sead/train/ldr.hpp"

#include <cstdint>
#include <optional>

namespace sead::eval {

// Cosine-distance k-NN vote over CN/AD rows. Ties between classes go to CN, then to the
// class of the nearest tied neighbour. MCI rows are ignored on both sides.
std::vector<Disease> knn_predict(const train::LdrStore& train, const train::LdrStore& test, int k);

// Macro-F1 of the k-NN probe fitted on train and evaluated on test.
double diag_f1(const train::LdrStore& train, const train::LdrStore& test, int k = 5);

struct DiagnosticF1 {
    std::optional<double> out_domain; // trained on every train-domain row, tested on test-domain rows
    double in_domain = 0.0;           // patient-level split within the training domains
};

DiagnosticF1 diagnostic_f1(const train::LdrStore& ldrs, double ratio, std::uint64_t seed, int k = 5);

struct DomainProbeParams {
    int steps = 500;
    double learning_rate = 0.3;
    double l2 = 1e-4;
    double ratio = 0.8;
    int min_rows_per_domain = 10;
};

// Fresh linear softmax probe predicting the domain from z, trained on a patient-level split;
// returns macro-F1 on the held-out patients.
double domain_f1(const train::LdrStore& ldrs, std::uint64_t seed, const DomainProbeParams& params = {});

} // namespace sead::eval
