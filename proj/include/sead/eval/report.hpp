#pragma once

#include "sead/eval/clustering.hpp"
#include "sead/eval/metrics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sead::eval {

// One row of the summary table. Preservation columns are empty for rows that do not
// produce reconstructions; diag_f1_out is empty when the LDR set carries no test-domain rows.
struct MetricsRow {
    std::string method; // CAE, NOISE, COMBAT, COMBAT-NOCOV, ADA, MDADA, SEADA
    std::optional<MeanStd> rmse;
    std::optional<MeanStd> ssim;
    std::optional<double> diag_f1_out;
    double diag_f1_in = 0.0;
    double domain_f1 = 0.0;
    double clustering_reduction_percent = 0.0;
    ClusteringIndices clustering;
    bool operator==(const MetricsRow&) const = default;
};

struct MetricsReport {
    int num_train_domains = 0;
    std::uint64_t seed = 0;
    std::vector<MetricsRow> rows;
    bool operator==(const MetricsReport&) const = default;
};

bool is_known_row_method(const std::string& method);
std::string display_name(const std::string& method);

// Orders rows canonically, fills clustering_reduction_percent against the CAE row and
// clears preservation columns for NOISE/COMBAT rows. Missing CAE row is an error.
MetricsReport build_report(std::vector<MetricsRow> rows, int num_train_domains, std::uint64_t seed);

std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& text);
std::string report_to_text(const MetricsReport& report);

} // namespace sead::eval
