#include "sead/config/config.hpp"

#include "sead/core/binary_io.hpp"
#include "sead/core/error.hpp"
#include "sead/core/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace sead::config {

using nlohmann::json;

namespace {

const std::vector<std::string> kAllMethods = {"CAE", "NOISE", "COMBAT", "ADA", "MDADA", "SEADA"};

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    require(j.is_object(), ErrorCode::Format, "config: '" + where + "' must be an object");
    for (const auto& item : j.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; });
        require(ok, ErrorCode::Format, "config: unknown key '" + where + (where.empty() ? "" : ".") + item.key() + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

json train_to_json(const train::TrainConfig& t) {
    return json{{"epochs", t.epochs},       {"batch_size", t.batch_size}, {"lr_stage1", t.lr_stage1},
                {"lr_stage2", t.lr_stage2}, {"lr_stage3", t.lr_stage3},   {"eps_stage3", t.eps_stage3}, {"w_recon", t.w_recon},
                {"w_style", t.w_style},     {"w_conf", t.w_conf},         {"checkpoint_every", t.checkpoint_every}};
}

void train_from_json(const json& j, const std::string& where, train::TrainConfig& t) {
    check_keys(j, where,
               {"epochs", "batch_size", "lr_stage1", "lr_stage2", "lr_stage3", "eps_stage3", "w_recon", "w_style", "w_conf", "checkpoint_every"});
    read(j, "epochs", t.epochs);
    read(j, "batch_size", t.batch_size);
    read(j, "lr_stage1", t.lr_stage1);
    read(j, "lr_stage2", t.lr_stage2);
    read(j, "lr_stage3", t.lr_stage3);
    read(j, "eps_stage3", t.eps_stage3);
    read(j, "w_recon", t.w_recon);
    read(j, "w_style", t.w_style);
    read(j, "w_conf", t.w_conf);
    read(j, "checkpoint_every", t.checkpoint_every);
}

Shape3 shape_from(const json& j) {
    const auto v = j.get<std::vector<int>>();
    require(v.size() == 3, ErrorCode::Format, "config: shape must have 3 entries");
    return {v[0], v[1], v[2]};
}

} // namespace

bool is_pipeline_method(const std::string& name) {
    return std::find(kAllMethods.begin(), kAllMethods.end(), name) != kAllMethods.end();
}

bool is_trained_method(const std::string& name) { return is_pipeline_method(name) && name != "NOISE" && name != "COMBAT"; }

std::uint64_t ExperimentConfig::phantom_seed() const { return derive_seed_tag(seed, "phantom"); }
std::uint64_t ExperimentConfig::train_seed() const { return derive_seed_tag(seed, "train"); }
std::uint64_t ExperimentConfig::split_seed() const { return derive_seed_tag(seed, "split"); }
std::uint64_t ExperimentConfig::eval_seed() const { return derive_seed_tag(seed, "eval"); }
std::uint64_t ExperimentConfig::noise_seed() const { return derive_seed_tag(seed, "noise"); }

phantom::PhantomConfig ExperimentConfig::phantom_config() const {
    phantom::PhantomConfig p = phantom;
    p.seed = phantom_seed();
    return p;
}

train::TrainConfig ExperimentConfig::train_config(nets::Method m) const {
    train::TrainConfig t = train.at(m);
    t.method = m;
    t.seed = train_seed();
    return t;
}

void ExperimentConfig::validate() const {
    require(schema_version == kConfigSchemaVersion, ErrorCode::Format,
            "config: schema_version " + std::to_string(schema_version) + " is not supported (expected " +
                std::to_string(kConfigSchemaVersion) + ")");
    phantom_config().validate();
    nets::ArchConfig a = arch;
    a.shape = phantom.shape;
    a.domain_names.clear();
    for (const auto& d : phantom.domains)
        if (d.train) a.domain_names.push_back(d.name);
    a.validate();
    require(!output_dir.empty(), ErrorCode::InvalidArgument, "config: output_dir is empty");
    require(!methods.empty(), ErrorCode::InvalidArgument, "config: methods list is empty");
    std::set<std::string> seen;
    for (const auto& m : methods) {
        require(is_pipeline_method(m), ErrorCode::InvalidArgument,
                "config: unknown method '" + m + "' (expected CAE, NOISE, COMBAT, ADA, MDADA or SEADA)");
        require(seen.insert(m).second, ErrorCode::InvalidArgument, "config: method '" + m + "' listed twice");
    }
    require(seen.count("CAE") > 0, ErrorCode::InvalidArgument, "config: methods must include the CAE baseline");
    for (const auto& [m, t] : train) {
        train::TrainConfig tt = t;
        tt.method = m;
        tt.validate();
    }
    eval.validate();
}

ExperimentConfig default_experiment_config() {
    ExperimentConfig c;
    c.phantom = phantom::default_phantom_config();
    c.methods = kAllMethods;
    for (auto m : {nets::Method::CAE, nets::Method::ADA, nets::Method::MDADA, nets::Method::SEADA}) {
        train::TrainConfig t;
        t.method = m;
        // A fast adversary; the adversarial stages each own an Adam instance, so
        // their learning rates rather than w_conf set the adversarial pressure.
        t.lr_stage2 = 1e-2;
        t.lr_stage3 = 3e-3;
        t.eps_stage3 = 1e-3;
        c.train[m] = t;
    }
    return c;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig c = default_experiment_config();
    try {
        const json j = json::parse(text);
        check_keys(j, "", {"schema_version", "seed", "output_dir", "phantom", "arch", "train", "methods", "eval"});
        require(j.contains("schema_version"), ErrorCode::Format, "config: schema_version is required");
        read(j, "schema_version", c.schema_version);
        read(j, "seed", c.seed);
        read(j, "output_dir", c.output_dir);
        read(j, "methods", c.methods);

        if (j.contains("phantom")) {
            const json& p = j.at("phantom");
            check_keys(p, "phantom",
                       {"shape", "voxel_size_mm", "scans_per_patient", "ad_atrophy", "mci_atrophy",
                        "lesion_radius_fraction", "normalize", "domains"});
            if (p.contains("shape")) c.phantom.shape = shape_from(p.at("shape"));
            read(p, "voxel_size_mm", c.phantom.voxel_size_mm);
            read(p, "scans_per_patient", c.phantom.scans_per_patient);
            read(p, "ad_atrophy", c.phantom.ad_atrophy);
            read(p, "mci_atrophy", c.phantom.mci_atrophy);
            read(p, "lesion_radius_fraction", c.phantom.lesion_radius_fraction);
            read(p, "normalize", c.phantom.normalize);
            if (p.contains("domains")) {
                c.phantom.domains.clear();
                for (const auto& d : p.at("domains")) {
                    check_keys(d, "phantom.domains[]",
                               {"name", "role", "gain", "bias", "noise_sigma", "blur_sigma", "cn", "ad", "mci"});
                    phantom::DomainSpec s;
                    s.name = d.at("name").get<std::string>();
                    const std::string role = d.value("role", std::string("train"));
                    require(role == "train" || role == "test", ErrorCode::Format,
                            "config: domain role must be 'train' or 'test', got '" + role + "'");
                    s.train = role == "train";
                    read(d, "gain", s.effect.gain);
                    read(d, "bias", s.effect.bias);
                    read(d, "noise_sigma", s.effect.noise_sigma);
                    read(d, "blur_sigma", s.effect.blur_sigma);
                    read(d, "cn", s.cn);
                    read(d, "ad", s.ad);
                    read(d, "mci", s.mci);
                    c.phantom.domains.push_back(s);
                }
            }
        }
        if (j.contains("arch")) {
            const json& a = j.at("arch");
            check_keys(a, "arch", {"latent_dim", "channels", "style_channels", "predictor_hidden", "max_groups"});
            read(a, "latent_dim", c.arch.latent_dim);
            read(a, "channels", c.arch.channels);
            read(a, "style_channels", c.arch.style_channels);
            read(a, "predictor_hidden", c.arch.predictor_hidden);
            read(a, "max_groups", c.arch.max_groups);
        }
        if (j.contains("train")) {
            const json& t = j.at("train");
            check_keys(t, "train", {"defaults", "CAE", "ADA", "MDADA", "SEADA"});
            if (t.contains("defaults"))
                for (auto& [m, tc] : c.train) train_from_json(t.at("defaults"), "train.defaults", tc);
            for (auto& [m, tc] : c.train) {
                const std::string name(nets::to_string(m));
                if (t.contains(name)) train_from_json(t.at(name), "train." + name, tc);
            }
        }
        if (j.contains("eval")) {
            const json& e = j.at("eval");
            check_keys(e, "eval",
                       {"split_ratio", "knn_k", "probe_steps", "probe_lr", "probe_l2", "probe_min_rows",
                        "clustering_restarts", "clustering_cn_only", "ssim_window", "noise_sigma", "combat_eb",
                        "combat_covariates", "combat_both"});
            read(e, "split_ratio", c.eval.split_ratio);
            read(e, "knn_k", c.eval.knn_k);
            read(e, "probe_steps", c.eval.probe.steps);
            read(e, "probe_lr", c.eval.probe.learning_rate);
            read(e, "probe_l2", c.eval.probe.l2);
            read(e, "probe_min_rows", c.eval.probe.min_rows_per_domain);
            read(e, "clustering_restarts", c.eval.clustering.restarts);
            read(e, "clustering_cn_only", c.eval.clustering.cn_only);
            read(e, "ssim_window", c.eval.ssim.window);
            read(e, "noise_sigma", c.eval.noise_sigma);
            read(e, "combat_eb", c.eval.combat_eb);
            read(e, "combat_covariates", c.eval.combat_covariates);
            read(e, "combat_both", c.eval.combat_both);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("config: ") + e.what());
    }
    c.arch.shape = c.phantom.shape;
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    require(std::filesystem::exists(path), ErrorCode::NotFound, "config file not found: " + path.string());
    try {
        return parse_experiment_config(io::read_text(path));
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
    json domains = json::array();
    for (const auto& d : c.phantom.domains)
        domains.push_back({{"name", d.name},
                           {"role", d.train ? "train" : "test"},
                           {"gain", d.effect.gain},
                           {"bias", d.effect.bias},
                           {"noise_sigma", d.effect.noise_sigma},
                           {"blur_sigma", d.effect.blur_sigma},
                           {"cn", d.cn},
                           {"ad", d.ad},
                           {"mci", d.mci}});
    json train = json::object();
    for (const auto& [m, t] : c.train) train[std::string(nets::to_string(m))] = train_to_json(t);
    const auto& e = c.eval;
    json j{{"schema_version", c.schema_version},
           {"seed", c.seed},
           {"output_dir", c.output_dir},
           {"methods", c.methods},
           {"phantom",
            {{"shape", {c.phantom.shape.depth, c.phantom.shape.height, c.phantom.shape.width}},
             {"voxel_size_mm", c.phantom.voxel_size_mm},
             {"scans_per_patient", c.phantom.scans_per_patient},
             {"ad_atrophy", c.phantom.ad_atrophy},
             {"mci_atrophy", c.phantom.mci_atrophy},
             {"lesion_radius_fraction", c.phantom.lesion_radius_fraction},
             {"normalize", c.phantom.normalize},
             {"domains", domains}}},
           {"arch",
            {{"latent_dim", c.arch.latent_dim},
             {"channels", c.arch.channels},
             {"style_channels", c.arch.style_channels},
             {"predictor_hidden", c.arch.predictor_hidden},
             {"max_groups", c.arch.max_groups}}},
           {"train", train},
           {"eval",
            {{"split_ratio", e.split_ratio},
             {"knn_k", e.knn_k},
             {"probe_steps", e.probe.steps},
             {"probe_lr", e.probe.learning_rate},
             {"probe_l2", e.probe.l2},
             {"probe_min_rows", e.probe.min_rows_per_domain},
             {"clustering_restarts", e.clustering.restarts},
             {"clustering_cn_only", e.clustering.cn_only},
             {"ssim_window", e.ssim.window},
             {"noise_sigma", e.noise_sigma},
             {"combat_eb", e.combat_eb},
             {"combat_covariates", e.combat_covariates},
             {"combat_both", e.combat_both}}}};
    return j.dump(2) + "\n";
}

} // namespace sead::config
