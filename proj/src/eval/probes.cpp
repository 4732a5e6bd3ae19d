#include "sead/eval/probes.hpp"

#include "sead/core/error.hpp"
#include "sead/eval/metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace sead::eval {

using train::LdrStore;

namespace {

bool diagnostic_row(Disease d) { return d == Disease::CN || d == Disease::AD; }

double norm(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

double cosine_distance(std::span<const float> a, double na, std::span<const float> b, double nb) {
    if (na == 0.0 || nb == 0.0) return 1.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
    return 1.0 - dot / (na * nb);
}

} // namespace

std::vector<Disease> knn_predict(const LdrStore& train, const LdrStore& test, int k) {
    require(k >= 1, ErrorCode::InvalidArgument, "knn: k must be >= 1");
    require(train.latent_dim == test.latent_dim, ErrorCode::InvalidArgument, "knn: latent dimension mismatch");
    std::vector<std::size_t> idx;
    std::vector<double> norms;
    bool has_cn = false, has_ad = false;
    for (std::size_t i = 0; i < train.rows(); ++i) {
        if (!diagnostic_row(train.diseases[i])) continue;
        idx.push_back(i);
        norms.push_back(norm(train.row(i)));
        has_cn |= train.diseases[i] == Disease::CN;
        has_ad |= train.diseases[i] == Disease::AD;
    }
    require(has_cn && has_ad, ErrorCode::Precondition, "diagnostic probe: training rows must contain both CN and AD");

    std::vector<Disease> out;
    std::vector<std::pair<double, std::size_t>> dist(idx.size());
    for (std::size_t t = 0; t < test.rows(); ++t) {
        if (!diagnostic_row(test.diseases[t])) continue;
        const auto q = test.row(t);
        const double nq = norm(q);
        for (std::size_t j = 0; j < idx.size(); ++j) dist[j] = {cosine_distance(q, nq, train.row(idx[j]), norms[j]), j};
        const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(kk), dist.end());
        int votes_cn = 0, votes_ad = 0;
        for (std::size_t j = 0; j < kk; ++j) (train.diseases[idx[dist[j].second]] == Disease::CN ? votes_cn : votes_ad)++;
        // Binary vote: a tie always involves CN, which wins it.
        out.push_back(votes_ad > votes_cn ? Disease::AD : Disease::CN);
    }
    return out;
}

double diag_f1(const LdrStore& train, const LdrStore& test, int k) {
    const auto pred = knn_predict(train, test, k);
    std::vector<int> y_true, y_pred;
    std::size_t p = 0;
    for (std::size_t t = 0; t < test.rows(); ++t) {
        if (!diagnostic_row(test.diseases[t])) continue;
        y_true.push_back(static_cast<int>(test.diseases[t]));
        y_pred.push_back(static_cast<int>(pred[p++]));
    }
    require(!y_true.empty(), ErrorCode::Precondition, "diagnostic probe: test set has no CN/AD rows");
    return macro_f1(y_true, y_pred);
}

DiagnosticF1 diagnostic_f1(const LdrStore& ldrs, double ratio, std::uint64_t seed, int k) {
    const LdrStore train_dom = ldrs.filter([&](std::size_t i) { return ldrs.is_train_domain(ldrs.domains[i]); });
    const LdrStore test_dom = ldrs.filter([&](std::size_t i) {
        return !ldrs.is_train_domain(ldrs.domains[i]) && diagnostic_row(ldrs.diseases[i]);
    });
    DiagnosticF1 out;
    if (test_dom.rows() > 0) out.out_domain = diag_f1(train_dom, test_dom, k);

    const Split split = split_patients(train_dom.patient_ids, ratio, seed);
    const LdrStore fit = train_dom.filter([&](std::size_t i) { return split.train_ids.count(train_dom.patient_ids[i]) > 0; });
    const LdrStore held = train_dom.filter([&](std::size_t i) { return split.eval_ids.count(train_dom.patient_ids[i]) > 0; });
    out.in_domain = diag_f1(fit, held, k);
    return out;
}

double domain_f1(const LdrStore& ldrs, std::uint64_t seed, const DomainProbeParams& params) {
    require(params.steps >= 1, ErrorCode::InvalidArgument, "domain probe: steps must be >= 1");
    std::map<int, int> count;
    for (int d : ldrs.domains) ++count[d];
    require(count.size() >= 2, ErrorCode::Precondition, "domain probe: needs at least 2 domains");
    for (const auto& [d, c] : count) {
        require(c >= params.min_rows_per_domain, ErrorCode::Precondition,
                "domain probe: domain " + std::to_string(d) + " has only " + std::to_string(c) + " rows (needs " +
                    std::to_string(params.min_rows_per_domain) + ")");
    }
    std::map<int, int> class_of;
    for (const auto& [d, c] : count) class_of.emplace(d, static_cast<int>(class_of.size()));
    const int K = static_cast<int>(class_of.size());
    const int L = ldrs.latent_dim;

    const Split split = split_patients(ldrs.patient_ids, params.ratio, seed);
    std::vector<std::size_t> tr, te;
    for (std::size_t i = 0; i < ldrs.rows(); ++i) (split.train_ids.count(ldrs.patient_ids[i]) ? tr : te).push_back(i);

    using Mat = Eigen::MatrixXd;
    auto gather = [&](const std::vector<std::size_t>& rows) {
        Mat X(static_cast<Eigen::Index>(rows.size()), L);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto v = ldrs.row(rows[r]);
            for (int j = 0; j < L; ++j) X(static_cast<Eigen::Index>(r), j) = v[j];
        }
        return X;
    };
    Mat Xtr = gather(tr), Xte = gather(te);
    const Eigen::RowVectorXd mu = Xtr.colwise().mean();
    Eigen::RowVectorXd sd = ((Xtr.rowwise() - mu).array().square().colwise().sum() / static_cast<double>(Xtr.rows())).sqrt();
    for (int j = 0; j < L; ++j) sd(j) = sd(j) > 1e-8 ? sd(j) : 1.0;
    Xtr = (Xtr.rowwise() - mu).array().rowwise() / sd.array();
    Xte = (Xte.rowwise() - mu).array().rowwise() / sd.array();

    Mat Y = Mat::Zero(Xtr.rows(), K);
    for (std::size_t r = 0; r < tr.size(); ++r) Y(static_cast<Eigen::Index>(r), class_of[ldrs.domains[tr[r]]]) = 1.0;

    // Full-batch Adam on the convex softmax-regression objective from a zero start.
    Mat W = Mat::Zero(L, K), mW = W, vW = W;
    Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(K), mb = b, vb = b;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double n = static_cast<double>(Xtr.rows());
    for (int t = 1; t <= params.steps; ++t) {
        Mat logits = (Xtr * W).rowwise() + b;
        for (Eigen::Index r = 0; r < logits.rows(); ++r) {
            const double mx = logits.row(r).maxCoeff();
            logits.row(r) = (logits.row(r).array() - mx).exp();
            logits.row(r) /= logits.row(r).sum();
        }
        const Mat G = (logits - Y) / n;
        const Mat gW = Xtr.transpose() * G + params.l2 * W;
        const Eigen::RowVectorXd gb = G.colwise().sum();
        mW = b1 * mW + (1 - b1) * gW;
        vW = b2 * vW + (1 - b2) * gW.cwiseProduct(gW);
        mb = b1 * mb + (1 - b1) * gb;
        vb = b2 * vb + (1 - b2) * gb.cwiseProduct(gb);
        const double c1 = 1 - std::pow(b1, t), c2 = 1 - std::pow(b2, t);
        W -= (params.learning_rate / c1 * mW.array() / ((vW.array() / c2).sqrt() + eps)).matrix();
        b -= (params.learning_rate / c1 * mb.array() / ((vb.array() / c2).sqrt() + eps)).matrix();
    }
    const Mat scores = (Xte * W).rowwise() + b;
    std::vector<int> y_true, y_pred;
    for (std::size_t r = 0; r < te.size(); ++r) {
        Eigen::Index best;
        scores.row(static_cast<Eigen::Index>(r)).maxCoeff(&best);
        y_true.push_back(class_of[ldrs.domains[te[r]]]);
        y_pred.push_back(static_cast<int>(best));
    }
    return macro_f1(y_true, y_pred);
}

} // namespace sead::eval
