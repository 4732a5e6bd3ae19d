#include "sead/app/pipeline.hpp"

#include "sead/combat/combat.hpp"
#include "sead/core/binary_io.hpp"
#include "sead/core/error.hpp"
#include "sead/eval/evaluate.hpp"
#include "sead/train/ldr.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace sead::app {

using config::ExperimentConfig;

namespace {

void guard_file(const fs::path& p, bool force) {
    require(force || !fs::exists(p), ErrorCode::Exists, p.string() + " already exists (use --force to overwrite)");
}

void require_file(const fs::path& p, const std::string& hint) {
    require(fs::exists(p), ErrorCode::NotFound, p.string() + " not found" + (hint.empty() ? "" : " (" + hint + ")"));
}

std::vector<DomainId> train_domains(const DatasetManifest& m) {
    std::vector<DomainId> out;
    for (const auto& d : m.domains)
        if (d.train) out.push_back(d);
    return out;
}

std::string fmtd(double v, const char* f = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Reference-coded disease indicators: one column per disease present, minus the first.
struct Covariates {
    std::vector<Disease> levels;
    std::vector<double> values;
    int columns = 0;
};

Covariates disease_covariates(const std::vector<Disease>& fit_rows) {
    Covariates c;
    std::set<Disease> present(fit_rows.begin(), fit_rows.end());
    c.levels.assign(present.begin(), present.end());
    c.columns = static_cast<int>(c.levels.size()) - 1;
    return c;
}

std::vector<double> encode_covariates(const Covariates& c, const std::vector<Disease>& rows) {
    std::vector<double> v(rows.size() * static_cast<std::size_t>(c.columns), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int k = 0; k < c.columns; ++k) v[i * c.columns + k] = rows[i] == c.levels[static_cast<std::size_t>(k) + 1] ? 1.0 : 0.0;
    return v;
}

} // namespace

std::string gen_data(const ExperimentConfig& cfg, const Layout& out, bool force) {
    const fs::path dir = out.data_dir();
    if (fs::exists(dir) && !fs::is_empty(dir)) {
        require(force, ErrorCode::Exists, dir.string() + " is not empty (use --force to overwrite)");
        fs::remove_all(dir);
    }
    const VolumeStore store = phantom::generate_dataset(cfg.phantom_config());
    save_volume_store(dir, store);
    io::write_text(out.config_copy(), config::experiment_config_to_json(cfg));
    std::ostringstream os;
    os << phantom::count_table(store.manifest);
    os << "wrote " << store.volumes.size() << " volumes to " << dir.string() << " (digest " << hex64(store_digest(store)) << ")\n";
    return os.str();
}

std::string train_method(const ExperimentConfig& cfg, const std::string& method, const Layout& out, bool force) {
    require(config::is_pipeline_method(method), ErrorCode::InvalidArgument,
            "unknown method '" + method + "' (expected CAE, ADA, MDADA or SEADA)");
    require(config::is_trained_method(method), ErrorCode::InvalidArgument,
            method + " is a post-hoc transform of CAE latents, not a trained model; use 'harmonize --method " + method + "'");
    const auto m = nets::parse_method(method);
    const fs::path ckpt = out.model_path(method), hist = out.history_path(method);
    guard_file(ckpt, force);
    guard_file(hist, force);
    require_file(out.data_dir() / "manifest.json", "run gen-data first");
    const VolumeStore store = load_volume_store(out.data_dir());
    const Split split = make_patient_split(store.manifest, cfg.eval.split_ratio, cfg.split_seed());
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < store.volumes.size(); ++i) {
        const auto& info = store.manifest.samples[i];
        if (store.manifest.is_train_domain(info.domain) && split.train_ids.count(info.patient_id)) samples.push_back(store.sample(i));
    }
    nets::ArchConfig arch = cfg.arch;
    arch.shape = store.manifest.shape;
    const train::TrainConfig tc = cfg.train_config(m);
    // the final epoch is written below as <method>.ckpt
    auto on_ckpt = [&](const nets::ModelBundle& b, int epochs_done) {
        if (epochs_done < tc.epochs) save_checkpoint(out.root / "models" / (method + ".epoch" + std::to_string(epochs_done) + ".ckpt"), b);
    };
    const train::TrainResult res = train::train(samples, train_domains(store.manifest), arch, tc, on_ckpt);
    save_checkpoint(ckpt, res.bundle);
    io::write_text(hist, train::history_to_tsv(res.history));

    std::ostringstream os;
    os << method << ": " << samples.size() << " training volumes, " << tc.epochs << " epochs, " << res.history.size()
       << " loss records\n";
    // last-epoch means per stage
    const int last_epoch = res.history.empty() ? 0 : res.history.back().epoch;
    double sums[4] = {0, 0, 0, 0};
    int counts[4] = {0, 0, 0, 0};
    for (const auto& r : res.history) {
        if (r.epoch != last_epoch) continue;
        sums[r.stage] += r.stage == 1 ? r.recon_loss : r.stage == 2 ? r.domain_loss : r.confusion_loss;
        ++counts[r.stage];
    }
    os << "epoch " << last_epoch + 1 << " means: recon " << fmtd(sums[1] / std::max(1, counts[1]));
    if (counts[2] > 0) os << ", domain " << fmtd(sums[2] / counts[2]) << ", confusion " << fmtd(sums[3] / std::max(1, counts[3]));
    os << "\n";
    os << "checkpoint " << ckpt.string() << " (digest " << hex64(nets::checkpoint_digest(res.bundle)) << ")\n";
    return os.str();
}

std::string extract(const fs::path& checkpoint, const fs::path& data_dir, const fs::path& output, bool force) {
    guard_file(output, force);
    require_file(checkpoint, "run train first");
    require_file(data_dir / "manifest.json", "run gen-data first");
    const nets::ModelBundle bundle = nets::load_checkpoint(checkpoint);
    const VolumeStore store = load_volume_store(data_dir);
    const auto samples = store.samples();
    const train::LdrStore ldrs = train::extract_ldrs(bundle, samples, store.manifest.domains);
    train::save_ldr(output, ldrs);
    std::ostringstream os;
    os << "extracted " << ldrs.rows() << " x " << ldrs.latent_dim << " latents (" << nets::to_string(bundle.method())
       << ") to " << output.string() << " (digest " << hex64(io::digest_file(output)) << ")\n";
    return os.str();
}

std::string harmonize(const ExperimentConfig& cfg, const std::string& method, const Layout& out,
                      const HarmonizeOptions& opts, bool force) {
    require(method == "NOISE" || method == "COMBAT", ErrorCode::InvalidArgument,
            "harmonize: unknown method '" + method + "' (expected NOISE or COMBAT)");
    const fs::path input = opts.input.value_or(out.ldr_path("CAE"));
    require_file(input, "extract the CAE latents first");
    const train::LdrStore in = train::load_ldr(input);
    std::ostringstream os;

    if (method == "NOISE") {
        const double sigma = opts.sigma.value_or(cfg.eval.noise_sigma);
        require(sigma >= 0.0, ErrorCode::InvalidArgument, "harmonize: sigma must be >= 0");
        const fs::path output = opts.output.value_or(out.ldr_path("NOISE"));
        guard_file(output, force);
        train::LdrStore noisy = train::add_noise(in, sigma, cfg.noise_seed());
        noisy.method = "NOISE";
        train::save_ldr(output, noisy);
        os << "NOISE: sigma " << fmtd(sigma) << " added to " << noisy.rows() << " rows -> " << output.string() << "\n";
        return os.str();
    }

    const bool eb = opts.eb.value_or(cfg.eval.combat_eb);
    std::vector<bool> variants;
    if (opts.covariates) variants.push_back(*opts.covariates);
    else {
        variants.push_back(cfg.eval.combat_covariates);
        if (cfg.eval.combat_both) variants.push_back(!cfg.eval.combat_covariates);
    }
    // Fit on the training domains; the test domains are unseen batches.
    const train::LdrStore fit_rows = in.filter([&](std::size_t i) { return in.is_train_domain(in.domains[i]); });
    std::vector<std::size_t> skipped;
    for (std::size_t i = 0; i < in.rows(); ++i)
        if (!in.is_train_domain(in.domains[i])) skipped.push_back(i);
    const std::vector<double> X(fit_rows.values.begin(), fit_rows.values.end());

    for (bool cov : variants) {
        const std::string name = cov ? "COMBAT" : "COMBAT-NOCOV";
        const fs::path output = opts.output && variants.size() == 1 ? *opts.output : out.ldr_path(name);
        fs::path model_path = output;
        model_path.replace_extension(".combat.json");
        fs::path skip_path = output;
        skip_path.replace_extension(".skipped.tsv");
        guard_file(output, force);

        combat::DesignInfo design;
        design.batches = fit_rows.domains;
        Covariates c;
        if (cov) {
            c = disease_covariates(fit_rows.diseases);
            design.num_covariates = c.columns;
            design.covariates = encode_covariates(c, fit_rows.diseases);
        }
        const combat::CombatModel model = combat::combat_fit(X, fit_rows.latent_dim, design, eb);
        const auto Y = combat::combat_apply(model, X, design.batches, design.covariates);
        train::LdrStore res = fit_rows;
        res.method = name;
        for (std::size_t k = 0; k < Y.size(); ++k) res.values[k] = static_cast<float>(Y[k]);
        train::save_ldr(output, res);
        combat::save_combat(model_path, model);

        std::ostringstream skip;
        skip << "row\tpatient_id\tdomain\n";
        for (std::size_t i : skipped)
            skip << i << "\t" << in.patient_ids[i] << "\t" << in.domain_table[static_cast<std::size_t>(in.domains[i])].name << "\n";
        io::write_text(skip_path, skip.str());

        os << name << ": fitted on " << fit_rows.rows() << " rows over " << model.batch_ids.size() << " domains (eb "
           << (eb ? "on" : "off") << ", " << model.num_covariates << " covariate column(s)) -> " << output.string() << "\n";
        if (!skipped.empty())
            os << name << ": skipped " << skipped.size() << " row(s) from domains unseen at fit time; listed in "
               << skip_path.string() << "\n";
    }
    return os.str();
}

std::string evaluate(const ExperimentConfig& cfg, const Layout& out, bool force) {
    guard_file(out.report_json(), force);
    guard_file(out.report_text(), force);
    require_file(out.ldr_path("CAE"), "the CAE baseline latents are required");
    require_file(out.data_dir() / "manifest.json", "run gen-data first");
    const VolumeStore store = load_volume_store(out.data_dir());
    const Split split = make_patient_split(store.manifest, cfg.eval.split_ratio, cfg.split_seed());

    std::vector<std::string> names;
    for (const auto& m : cfg.methods) {
        names.push_back(m);
        if (m == "COMBAT" && fs::exists(out.ldr_path("COMBAT-NOCOV"))) names.push_back("COMBAT-NOCOV");
    }
    std::vector<eval::MetricsRow> rows;
    for (const auto& name : names) {
        const fs::path lp = out.ldr_path(name);
        require_file(lp, name == "NOISE" || name == "COMBAT" ? "run harmonize first" : "run extract first");
        const train::LdrStore ldrs = train::load_ldr(lp);
        eval::MetricsRow row = eval::evaluate_ldrs(name, ldrs, cfg.eval, cfg.split_seed(), cfg.eval_seed());
        if (config::is_trained_method(name)) {
            require_file(out.model_path(name), "run train first");
            const auto bundle = nets::load_checkpoint(out.model_path(name));
            const auto p = eval::reconstruction_metrics(bundle, store, split, cfg.eval.ssim);
            row.rmse = p.rmse;
            row.ssim = p.ssim;
        }
        rows.push_back(std::move(row));
    }
    const int K = static_cast<int>(train_domains(store.manifest).size());
    const eval::MetricsReport rep = eval::build_report(std::move(rows), K, cfg.seed);
    const std::string text = eval::report_to_text(rep);
    io::write_text(out.report_json(), eval::report_to_json(rep));
    io::write_text(out.report_text(), text);
    return text;
}

std::string render_report(const fs::path& report_json) {
    require_file(report_json, "run evaluate first");
    return eval::report_to_text(eval::report_from_json(io::read_text(report_json)));
}

} // namespace sead::app
