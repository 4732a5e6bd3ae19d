#include "sead/eval/evaluate.hpp"

#include "sead/core/error.hpp"

namespace sead::eval {

void EvalSettings::validate() const {
    require(split_ratio > 0.0 && split_ratio < 1.0, ErrorCode::InvalidArgument, "eval.split_ratio must lie in (0, 1)");
    require(knn_k >= 1, ErrorCode::InvalidArgument, "eval.knn_k must be >= 1");
    require(probe.steps >= 1, ErrorCode::InvalidArgument, "eval.probe_steps must be >= 1");
    require(probe.learning_rate > 0.0, ErrorCode::InvalidArgument, "eval.probe_lr must be > 0");
    require(probe.l2 >= 0.0, ErrorCode::InvalidArgument, "eval.probe_l2 must be >= 0");
    require(clustering.restarts >= 1, ErrorCode::InvalidArgument, "eval.clustering_restarts must be >= 1");
    require(ssim.window >= 2, ErrorCode::InvalidArgument, "eval.ssim_window must be >= 2");
    require(noise_sigma >= 0.0, ErrorCode::InvalidArgument, "eval.noise_sigma must be >= 0");
}

Preservation reconstruction_metrics(const nets::ModelBundle& bundle, const VolumeStore& store, const Split& split,
                                    const SsimParams& ssim) {
    std::vector<double> r, s;
    const auto& man = store.manifest;
    for (std::size_t i = 0; i < man.samples.size(); ++i) {
        const auto& info = man.samples[i];
        if (!man.is_train_domain(info.domain) || !split.eval_ids.count(info.patient_id)) continue;
        const Volume& x = store.volumes[i];
        const Volume rec = nets::reconstruct(bundle, x, bundle.domain_class(man.domains[info.domain].name));
        r.push_back(rmse(x, rec));
        s.push_back(ssim3d(x, rec, ssim));
    }
    require(!r.empty(), ErrorCode::Precondition, "reconstruction metrics: the evaluation split is empty");
    return {mean_std(r), mean_std(s)};
}

MetricsRow evaluate_ldrs(const std::string& method, const train::LdrStore& ldrs, const EvalSettings& settings,
                         std::uint64_t split_seed, std::uint64_t eval_seed) {
    MetricsRow row;
    row.method = method;
    const DiagnosticF1 diag = diagnostic_f1(ldrs, settings.split_ratio, split_seed, settings.knn_k);
    row.diag_f1_out = diag.out_domain;
    row.diag_f1_in = diag.in_domain;
    const train::LdrStore train_dom = ldrs.filter([&](std::size_t i) { return ldrs.is_train_domain(ldrs.domains[i]); });
    DomainProbeParams probe = settings.probe;
    probe.ratio = settings.split_ratio;
    row.domain_f1 = domain_f1(train_dom, split_seed, probe);
    row.clustering = clustering_indices(ldrs, eval_seed, settings.clustering);
    return row;
}

} // namespace sead::eval
