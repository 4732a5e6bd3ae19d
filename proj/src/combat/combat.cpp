#include "sead/combat/combat.hpp"

#include "sead/core/binary_io.hpp"
#include "sead/core/error.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace sead::combat {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using nlohmann::json;

namespace {

std::map<int, int> batch_index(const std::vector<int>& ids) {
    std::map<int, int> m;
    for (std::size_t i = 0; i < ids.size(); ++i) m.emplace(ids[i], static_cast<int>(i));
    return m;
}

Eigen::Map<const Mat> as_matrix(std::span<const double> v, std::size_t rows, int cols) {
    return Eigen::Map<const Mat>(v.data(), static_cast<Eigen::Index>(rows), cols);
}

double mean_of(const Eigen::VectorXd& v) { return v.mean(); }

// sample variance across entries
double var_of(const Eigen::VectorXd& v) {
    if (v.size() < 2) return 0.0;
    return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

double rel_change(const Eigen::VectorXd& now, const Eigen::VectorXd& old) {
    const double scale = std::max(old.cwiseAbs().maxCoeff(), 1e-12);
    return (now - old).cwiseAbs().maxCoeff() / scale;
}

} // namespace

CombatModel combat_fit(std::span<const double> features, int L, const DesignInfo& design, bool eb) {
    require(L >= 1, ErrorCode::InvalidArgument, "combat: feature count must be >= 1");
    const std::size_t N = design.batches.size();
    require(features.size() == N * static_cast<std::size_t>(L), ErrorCode::InvalidArgument,
            "combat: feature matrix has " + std::to_string(features.size()) + " values, expected " +
                std::to_string(N) + " x " + std::to_string(L));
    const int p = design.num_covariates;
    require(p >= 0 && design.covariates.size() == N * static_cast<std::size_t>(p), ErrorCode::InvalidArgument,
            "combat: covariate matrix size does not match rows x num_covariates");

    std::map<int, int> count;
    for (int b : design.batches) ++count[b];
    require(!count.empty(), ErrorCode::InvalidArgument, "combat: no rows");
    for (const auto& [b, c] : count)
        require(c >= 2, ErrorCode::Precondition,
                "combat: batch " + std::to_string(b) + " has " + std::to_string(c) + " row(s), needs >= 2");

    CombatModel m;
    m.num_features = L;
    m.num_covariates = p;
    m.eb = eb;
    for (const auto& kv : count) m.batch_ids.push_back(kv.first);
    const int B = static_cast<int>(m.batch_ids.size());
    const auto bidx = batch_index(m.batch_ids);

    // design = [batch one-hot | covariates]
    Mat X = Mat::Zero(static_cast<Eigen::Index>(N), B + p);
    for (std::size_t i = 0; i < N; ++i) {
        X(static_cast<Eigen::Index>(i), bidx.at(design.batches[i])) = 1.0;
        for (int c = 0; c < p; ++c) X(static_cast<Eigen::Index>(i), B + c) = design.covariates[i * p + c];
    }
    const Eigen::ColPivHouseholderQR<Mat> qr(X);
    require(qr.rank() == B + p, ErrorCode::Precondition,
            "combat: design [batch indicators | covariates] is rank deficient (rank " + std::to_string(qr.rank()) +
                " of " + std::to_string(B + p) + ")");
    require(static_cast<int>(N) > B, ErrorCode::Precondition, "combat: not enough rows for the pooled variance");

    const auto Y = as_matrix(features, N, L);
    const Mat coef = qr.solve(Mat(Y)); // (B+p) x L
    const Mat resid = Y - X * coef;

    m.beta.assign(static_cast<std::size_t>(1 + p) * L, 0.0);
    m.pooled_sd.assign(L, 0.0);
    for (int j = 0; j < L; ++j) {
        double grand = 0.0;
        for (int b = 0; b < B; ++b) grand += static_cast<double>(count[m.batch_ids[b]]) / static_cast<double>(N) * coef(b, j);
        m.beta[j] = grand;
        for (int c = 0; c < p; ++c) m.beta[static_cast<std::size_t>(1 + c) * L + j] = coef(B + c, j);
        // within-batch degrees of freedom so one batch standardizes to unit variance exactly
        const double var = resid.col(j).squaredNorm() / static_cast<double>(N - static_cast<std::size_t>(B));
        // residuals of an exactly explained column are rounding noise, judge them against the column's size
        const double power = Y.col(j).squaredNorm() / static_cast<double>(N);
        require(var > 1e-20 * power && std::isfinite(var), ErrorCode::Numeric,
                "combat: feature " + std::to_string(j) + " has zero pooled variance");
        m.pooled_sd[j] = std::sqrt(var);
    }

    // standardized data
    Mat S(static_cast<Eigen::Index>(N), L);
    for (std::size_t i = 0; i < N; ++i)
        for (int j = 0; j < L; ++j) {
            double fit = m.beta[j];
            for (int c = 0; c < p; ++c) fit += design.covariates[i * p + c] * m.beta[static_cast<std::size_t>(1 + c) * L + j];
            S(static_cast<Eigen::Index>(i), j) = (Y(static_cast<Eigen::Index>(i), j) - fit) / m.pooled_sd[j];
        }

    m.gamma_star.assign(static_cast<std::size_t>(B) * L, 0.0);
    m.delta_star.assign(static_cast<std::size_t>(B) * L, 0.0);
    for (int b = 0; b < B; ++b) {
        std::vector<Eigen::Index> rows;
        for (std::size_t i = 0; i < N; ++i)
            if (design.batches[i] == m.batch_ids[b]) rows.push_back(static_cast<Eigen::Index>(i));
        const double n = static_cast<double>(rows.size());
        const Mat Sb = S(rows, Eigen::all);
        const Eigen::VectorXd g_hat = Sb.colwise().mean().transpose();
        Eigen::VectorXd d_hat(L);
        for (int j = 0; j < L; ++j) d_hat(j) = (Sb.col(j).array() - g_hat(j)).square().sum() / (n - 1.0);

        Eigen::VectorXd g = g_hat, d = d_hat;
        if (eb && L >= 2) {
            const double g_bar = mean_of(g_hat), t2 = var_of(g_hat);
            const double dm = mean_of(d_hat), ds2 = var_of(d_hat);
            // inverse-gamma moments; a flat spread of scales leaves them unshrunk
            const bool shrink_scale = ds2 > 1e-12 * dm * dm;
            const double a = shrink_scale ? (2.0 * ds2 + dm * dm) / ds2 : 0.0;
            const double bb = shrink_scale ? (dm * ds2 + dm * dm * dm) / ds2 : 0.0;
            int it = 0;
            for (; it < 100; ++it) {
                Eigen::VectorXd g_new = ((t2 * n) * g_hat.array() + d.array() * g_bar) / (t2 * n + d.array());
                Eigen::VectorXd d_new = d;
                if (shrink_scale) {
                    for (int j = 0; j < L; ++j) {
                        const double sum2 = (Sb.col(j).array() - g_new(j)).square().sum();
                        d_new(j) = (0.5 * sum2 + bb) / (n / 2.0 + a - 1.0);
                    }
                }
                require((d_new.array() > 0.0).all() && d_new.allFinite(), ErrorCode::Numeric,
                        "combat: scale estimate left the positive reals at iteration " + std::to_string(it));
                const double change = std::max(rel_change(g_new, g), rel_change(d_new, d));
                g = g_new;
                d = d_new;
                if (change < 1e-6) {
                    ++it;
                    break;
                }
            }
            m.iterations = std::max(m.iterations, it);
        }
        for (int j = 0; j < L; ++j) {
            require(d(j) > 0.0, ErrorCode::Numeric,
                    "combat: batch " + std::to_string(m.batch_ids[b]) + " feature " + std::to_string(j) + " has zero variance");
            m.gamma_star[static_cast<std::size_t>(b) * L + j] = g(j);
            m.delta_star[static_cast<std::size_t>(b) * L + j] = d(j);
        }
    }
    return m;
}

std::vector<double> combat_apply(const CombatModel& m, std::span<const double> features, std::span<const int> batches,
                                 std::span<const double> covariates) {
    const int L = m.num_features, p = m.num_covariates;
    const std::size_t N = batches.size();
    require(features.size() == N * static_cast<std::size_t>(L), ErrorCode::InvalidArgument,
            "combat apply: feature matrix does not match rows x " + std::to_string(L));
    require(covariates.size() == N * static_cast<std::size_t>(p), ErrorCode::InvalidArgument,
            "combat apply: model expects " + std::to_string(p) + " covariate column(s)");
    const auto bidx = batch_index(m.batch_ids);
    std::vector<double> out(features.size());
    for (std::size_t i = 0; i < N; ++i) {
        const auto it = bidx.find(batches[i]);
        require(it != bidx.end(), ErrorCode::Precondition,
                "combat apply: batch " + std::to_string(batches[i]) + " (row " + std::to_string(i) +
                    ") was not present at fit time");
        const std::size_t b = static_cast<std::size_t>(it->second);
        for (int j = 0; j < L; ++j) {
            double fit = m.beta[j];
            for (int c = 0; c < p; ++c) fit += covariates[i * p + c] * m.beta[static_cast<std::size_t>(1 + c) * L + j];
            const double s = (features[i * L + j] - fit) / m.pooled_sd[j];
            const double adj = (s - m.gamma_star[b * L + j]) / std::sqrt(m.delta_star[b * L + j]);
            out[i * L + j] = adj * m.pooled_sd[j] + fit;
        }
    }
    return out;
}

std::string combat_to_json(const CombatModel& m) {
    json j{{"schema_version", 1},
           {"num_features", m.num_features},
           {"num_covariates", m.num_covariates},
           {"eb", m.eb},
           {"iterations", m.iterations},
           {"batch_ids", m.batch_ids},
           {"beta", m.beta},
           {"pooled_sd", m.pooled_sd},
           {"gamma_star", m.gamma_star},
           {"delta_star", m.delta_star}};
    return j.dump(1) + "\n";
}

CombatModel combat_from_json(const std::string& text) {
    CombatModel m;
    try {
        const json j = json::parse(text);
        require(j.at("schema_version").get<int>() == 1, ErrorCode::Format, "combat model: unsupported schema_version");
        m.num_features = j.at("num_features").get<int>();
        m.num_covariates = j.at("num_covariates").get<int>();
        m.eb = j.at("eb").get<bool>();
        m.iterations = j.at("iterations").get<int>();
        m.batch_ids = j.at("batch_ids").get<std::vector<int>>();
        m.beta = j.at("beta").get<std::vector<double>>();
        m.pooled_sd = j.at("pooled_sd").get<std::vector<double>>();
        m.gamma_star = j.at("gamma_star").get<std::vector<double>>();
        m.delta_star = j.at("delta_star").get<std::vector<double>>();
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("combat model: malformed JSON: ") + e.what());
    }
    const std::size_t L = static_cast<std::size_t>(m.num_features), B = m.batch_ids.size();
    require(B > 0 && m.beta.size() == (1 + static_cast<std::size_t>(m.num_covariates)) * L && m.pooled_sd.size() == L &&
                m.gamma_star.size() == B * L && m.delta_star.size() == B * L,
            ErrorCode::Format, "combat model: array sizes are inconsistent");
    for (double d : m.delta_star) require(d > 0.0, ErrorCode::Format, "combat model: non-positive scale entry");
    return m;
}

void save_combat(const std::filesystem::path& path, const CombatModel& model) { io::write_text(path, combat_to_json(model)); }

CombatModel load_combat(const std::filesystem::path& path) { return combat_from_json(io::read_text(path)); }

} // namespace sead::combat
