#include "sead/eval/report.hpp"

#include "sead/core/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

namespace sead::eval {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 7> kOrder = {"CAE", "NOISE", "COMBAT", "COMBAT-NOCOV", "ADA", "MDADA", "SEADA"};

int rank(const std::string& m) {
    for (std::size_t i = 0; i < kOrder.size(); ++i)
        if (m == kOrder[i]) return static_cast<int>(i);
    return -1;
}

bool post_hoc(const std::string& m) { return m == "NOISE" || m == "COMBAT" || m == "COMBAT-NOCOV"; }

json opt_ms(const std::optional<MeanStd>& v) {
    if (!v) return nullptr;
    return json{{"mean", v->mean}, {"std", v->std}};
}

std::optional<MeanStd> ms_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return MeanStd{j.at("mean").get<double>(), j.at("std").get<double>()};
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

} // namespace

bool is_known_row_method(const std::string& method) { return rank(method) >= 0; }

std::string display_name(const std::string& m) {
    if (m == "CAE") return "3D-CAE (baseline)";
    if (m == "NOISE") return "+ Noise";
    if (m == "COMBAT") return "+ ComBat";
    if (m == "COMBAT-NOCOV") return "+ ComBat (no cov.)";
    if (m == "ADA") return "+ ADA";
    if (m == "MDADA") return "+ MD-ADA";
    if (m == "SEADA") return "+ SE-ADA";
    return m;
}

MetricsReport build_report(std::vector<MetricsRow> rows, int num_train_domains, std::uint64_t seed) {
    for (const auto& r : rows)
        require(is_known_row_method(r.method), ErrorCode::InvalidArgument, "report: unknown method '" + r.method + "'");
    std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) { return rank(a.method) < rank(b.method); });
    for (std::size_t i = 1; i < rows.size(); ++i)
        require(rows[i].method != rows[i - 1].method, ErrorCode::InvalidArgument, "report: duplicate row for " + rows[i].method);
    auto base = std::find_if(rows.begin(), rows.end(), [](const MetricsRow& r) { return r.method == "CAE"; });
    require(base != rows.end(), ErrorCode::Precondition, "report: the CAE baseline row is missing");
    const ClusteringIndices baseline = base->clustering;
    for (auto& r : rows) {
        if (post_hoc(r.method)) {
            r.rmse.reset();
            r.ssim.reset();
        }
        r.clustering_reduction_percent = r.method == "CAE" ? 0.0 : clustering_reduction(r.clustering, baseline);
    }
    MetricsReport rep;
    rep.num_train_domains = num_train_domains;
    rep.seed = seed;
    rep.rows = std::move(rows);
    return rep;
}

std::string report_to_json(const MetricsReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        const auto& c = r.clustering;
        rows.push_back({{"method", r.method},
                        {"rmse", opt_ms(r.rmse)},
                        {"ssim", opt_ms(r.ssim)},
                        {"diag_f1_out", r.diag_f1_out ? json(*r.diag_f1_out) : json(nullptr)},
                        {"diag_f1_in", r.diag_f1_in},
                        {"domain_f1", r.domain_f1},
                        {"clustering_reduction_percent", r.clustering_reduction_percent},
                        {"clustering",
                         {{"silhouette", c.silhouette},
                          {"homogeneity", c.homogeneity},
                          {"completeness", c.completeness},
                          {"v_measure", c.v_measure},
                          {"ari", c.ari},
                          {"ami", c.ami}}}});
    }
    json j{{"schema_version", 1}, {"num_train_domains", report.num_train_domains}, {"seed", report.seed}, {"rows", rows}};
    return j.dump(2) + "\n";
}

MetricsReport report_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        require(j.at("schema_version").get<int>() == 1, ErrorCode::Format, "report: unsupported schema_version");
        MetricsReport rep;
        rep.num_train_domains = j.at("num_train_domains").get<int>();
        rep.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& jr : j.at("rows")) {
            MetricsRow r;
            r.method = jr.at("method").get<std::string>();
            r.rmse = ms_from(jr.at("rmse"));
            r.ssim = ms_from(jr.at("ssim"));
            if (!jr.at("diag_f1_out").is_null()) r.diag_f1_out = jr.at("diag_f1_out").get<double>();
            r.diag_f1_in = jr.at("diag_f1_in").get<double>();
            r.domain_f1 = jr.at("domain_f1").get<double>();
            r.clustering_reduction_percent = jr.at("clustering_reduction_percent").get<double>();
            const auto& c = jr.at("clustering");
            r.clustering = {c.at("silhouette").get<double>(), c.at("homogeneity").get<double>(),
                            c.at("completeness").get<double>(), c.at("v_measure").get<double>(),
                            c.at("ari").get<double>(), c.at("ami").get<double>()};
            rep.rows.push_back(std::move(r));
        }
        return rep;
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("report: malformed JSON: ") + e.what());
    }
}

std::string report_to_text(const MetricsReport& report) {
    auto ms = [](const std::optional<MeanStd>& v, const char* f) {
        if (!v) return std::string("n/a");
        return fmt(f, v->mean) + "±" + fmt(f, v->std);
    };
    // Column widths count display characters; the +/- sign is two bytes in UTF-8.
    auto pad = [](std::string s, std::size_t w) {
        std::size_t shown = 0;
        for (unsigned char ch : s) shown += (ch & 0xC0) != 0x80;
        if (shown < w) s.append(w - shown, ' ');
        return s;
    };
    std::ostringstream os;
    const int K = report.num_train_domains;
    os << pad("", 22) << pad("Data preservation", 34) << pad("Diag. capability", 18) << "Domain harmonization ("
       << K << " domains)\n";
    os << pad("Method", 22) << pad("RMSE ↓", 17) << pad("SSIM ↑", 17) << pad("Diag. F1 ↑ †", 18)
       << pad("Domain F1 ↓ ‡", 16) << "Clustering [%] ↓\n";
    for (const auto& r : report.rows) {
        std::string diag = (r.diag_f1_out ? fmt("%.3f", *r.diag_f1_out) : std::string("n/a")) + " (" + fmt("%.3f", r.diag_f1_in) + ")";
        std::string clus = r.method == "CAE" ? std::string("0") : fmt("%.2f", r.clustering_reduction_percent);
        os << pad(display_name(r.method), 22) << pad(ms(r.rmse, "%.4f"), 17) << pad(ms(r.ssim, "%.3f"), 17)
           << pad(diag, 18) << pad(fmt("%.3f", r.domain_f1), 16) << clus << "\n";
    }
    os << "\n† out-of-domain F1 on held-out test domains; in parentheses, F1 on an 8:2 patient split of the"
          " training domains.\n";
    os << "‡ target is chance level, 1/" << K << " = " << fmt("%.3f", K > 0 ? 1.0 / K : 0.0)
       << "; lower means z carries less domain information.\n";
    return os.str();
}

} // namespace sead::eval
