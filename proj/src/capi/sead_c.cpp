#include "sead/sead.h"

#include "sead/app/pipeline.hpp"
#include "sead/core/error.hpp"
#include "sead/core/store.hpp"
#include "sead/nets/bundle.hpp"
#include "sead/train/ldr.hpp"
#include "sead/train/trainer.hpp"

#include <cstdlib>
#include <memory>
#include <cstring>
#include <new>
#include <string>

struct sead_config {
    sead::config::ExperimentConfig cfg;
};
struct sead_store {
    sead::VolumeStore store;
};
struct sead_model {
    sead::nets::ModelBundle bundle;
};
struct sead_ldr {
    sead::train::LdrStore ldr;
};

namespace {

thread_local std::string g_last_error;

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

// Runs fn and converts every exception into a status code plus a stored message.
template <typename Fn>
sead_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        fn();
        return SEAD_OK;
    } catch (const sead::Error& e) {
        g_last_error = e.what();
        return static_cast<sead_status>(static_cast<int>(e.code()));
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return SEAD_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SEAD_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return SEAD_E_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) sead::fail(sead::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

void emit(char** out, const std::string& s) {
    if (out) *out = dup(s);
}

} // namespace

extern "C" {

const char* sead_last_error_message(void) { return g_last_error.c_str(); }

const char* sead_status_name(sead_status status) {
    switch (status) {
    case SEAD_OK: return "ok";
    case SEAD_E_INVALID_ARGUMENT: return "invalid_argument";
    case SEAD_E_IO: return "io";
    case SEAD_E_FORMAT: return "format";
    case SEAD_E_PRECONDITION: return "precondition";
    case SEAD_E_NUMERIC: return "numeric";
    case SEAD_E_NOT_FOUND: return "not_found";
    case SEAD_E_EXISTS: return "exists";
    case SEAD_E_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* sead_version(void) { return "0.1.0"; }

void sead_string_free(char* s) { std::free(s); }

sead_status sead_config_load(const char* path, sead_config** out) {
    return guarded([&] {
        need(out, "out");
        auto c = std::make_unique<sead_config>();
        if (path) c->cfg = sead::config::load_experiment_config(path);
        else {
            c->cfg = sead::config::default_experiment_config();
            c->cfg.arch.shape = c->cfg.phantom.shape;
        }
        *out = c.release();
    });
}

void sead_config_free(sead_config* cfg) { delete cfg; }

sead_status sead_config_set_seed(sead_config* cfg, uint64_t seed) {
    return guarded([&] {
        need(cfg, "config");
        cfg->cfg.seed = seed;
    });
}

sead_status sead_config_set_output_dir(sead_config* cfg, const char* dir) {
    return guarded([&] {
        need(cfg, "config");
        need(dir, "dir");
        sead::require(*dir != '\0', sead::ErrorCode::InvalidArgument, "output directory is empty");
        cfg->cfg.output_dir = dir;
    });
}

sead_status sead_config_output_dir(const sead_config* cfg, char** out) {
    return guarded([&] {
        need(cfg, "config");
        need(out, "out");
        *out = dup(cfg->cfg.output_dir);
    });
}

sead_status sead_config_to_json(const sead_config* cfg, char** out) {
    return guarded([&] {
        need(cfg, "config");
        need(out, "out");
        *out = dup(sead::config::experiment_config_to_json(cfg->cfg));
    });
}

sead_status sead_store_load(const char* dir, sead_store** out) {
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        auto s = std::make_unique<sead_store>();
        s->store = sead::load_volume_store(dir);
        *out = s.release();
    });
}

void sead_store_free(sead_store* store) { delete store; }

sead_status sead_store_count(const sead_store* store, size_t* out) {
    return guarded([&] {
        need(store, "store");
        need(out, "out");
        *out = store->store.volumes.size();
    });
}

sead_status sead_store_digest(const sead_store* store, uint64_t* out) {
    return guarded([&] {
        need(store, "store");
        need(out, "out");
        *out = sead::store_digest(store->store);
    });
}

sead_status sead_model_load(const char* path, sead_model** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new sead_model{sead::nets::load_checkpoint(path)};
    });
}

void sead_model_free(sead_model* model) { delete model; }

sead_status sead_model_latent_dim(const sead_model* model, int* out) {
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        *out = model->bundle.arch().latent_dim;
    });
}

sead_status sead_model_method(const sead_model* model, char** out) {
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        *out = dup(std::string(sead::nets::to_string(model->bundle.method())));
    });
}

sead_status sead_model_extract(const sead_model* model, const sead_store* store, sead_ldr** out) {
    return guarded([&] {
        need(model, "model");
        need(store, "store");
        need(out, "out");
        const auto samples = store->store.samples();
        *out = new sead_ldr{sead::train::extract_ldrs(model->bundle, samples, store->store.manifest.domains)};
    });
}

sead_status sead_ldr_load(const char* path, sead_ldr** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new sead_ldr{sead::train::load_ldr(path)};
    });
}

sead_status sead_ldr_save(const sead_ldr* ldr, const char* path) {
    return guarded([&] {
        need(ldr, "ldr");
        need(path, "path");
        sead::train::save_ldr(path, ldr->ldr);
    });
}

void sead_ldr_free(sead_ldr* ldr) { delete ldr; }

sead_status sead_ldr_shape(const sead_ldr* ldr, size_t* rows, int* dim) {
    return guarded([&] {
        need(ldr, "ldr");
        if (rows) *rows = ldr->ldr.rows();
        if (dim) *dim = ldr->ldr.latent_dim;
    });
}

sead_status sead_ldr_values(const sead_ldr* ldr, float* dst, size_t capacity) {
    return guarded([&] {
        need(ldr, "ldr");
        need(dst, "dst");
        const auto& v = ldr->ldr.values;
        sead::require(capacity >= v.size(), sead::ErrorCode::InvalidArgument,
                      "destination holds " + std::to_string(capacity) + " floats, need " + std::to_string(v.size()));
        std::memcpy(dst, v.data(), v.size() * sizeof(float));
    });
}

sead_status sead_cmd_gen_data(const sead_config* cfg, const char* out_root, int force, char** summary) {
    return guarded([&] {
        need(cfg, "config");
        need(out_root, "out_root");
        emit(summary, sead::app::gen_data(cfg->cfg, {out_root}, force != 0));
    });
}

sead_status sead_cmd_train(const sead_config* cfg, const char* method, const char* out_root, int force, char** summary) {
    return guarded([&] {
        need(cfg, "config");
        need(method, "method");
        need(out_root, "out_root");
        emit(summary, sead::app::train_method(cfg->cfg, method, {out_root}, force != 0));
    });
}

sead_status sead_cmd_extract(const char* checkpoint, const char* data_dir, const char* output, int force, char** summary) {
    return guarded([&] {
        need(checkpoint, "checkpoint");
        need(data_dir, "data_dir");
        need(output, "output");
        emit(summary, sead::app::extract(checkpoint, data_dir, output, force != 0));
    });
}

void sead_harmonize_options_init(sead_harmonize_options* opts) {
    if (!opts) return;
    opts->sigma = -1.0;
    opts->eb = -1;
    opts->covariates = -1;
    opts->input = nullptr;
    opts->output = nullptr;
}

sead_status sead_cmd_harmonize(const sead_config* cfg, const char* method, const char* out_root,
                               const sead_harmonize_options* opts, int force, char** summary) {
    return guarded([&] {
        need(cfg, "config");
        need(method, "method");
        need(out_root, "out_root");
        sead::app::HarmonizeOptions o;
        if (opts) {
            if (opts->sigma >= 0.0) o.sigma = opts->sigma;
            if (opts->eb >= 0) o.eb = opts->eb != 0;
            if (opts->covariates >= 0) o.covariates = opts->covariates != 0;
            if (opts->input) o.input = opts->input;
            if (opts->output) o.output = opts->output;
        }
        emit(summary, sead::app::harmonize(cfg->cfg, method, {out_root}, o, force != 0));
    });
}

sead_status sead_cmd_evaluate(const sead_config* cfg, const char* out_root, int force, char** summary) {
    return guarded([&] {
        need(cfg, "config");
        need(out_root, "out_root");
        emit(summary, sead::app::evaluate(cfg->cfg, {out_root}, force != 0));
    });
}

sead_status sead_cmd_report(const char* report_json, char** text) {
    return guarded([&] {
        need(report_json, "report_json");
        need(text, "text");
        *text = dup(sead::app::render_report(report_json));
    });
}

} // extern "C"
