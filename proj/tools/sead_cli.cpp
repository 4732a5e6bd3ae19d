// Command-line front end; talks to the library only through sead.h.
#include "sead/sead.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

struct Failure {
    int code;
    std::string message;
};

void check(sead_status st) {
    if (st != SEAD_OK) throw Failure{static_cast<int>(st), sead_last_error_message()};
}

std::string take(char* s) {
    std::string out = s ? s : "";
    sead_string_free(s);
    return out;
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

int report_failure(int code, const std::string& message) {
    std::fprintf(stderr, "error[SEAD-E%03d]: %s\n", code, one_line(message).c_str());
    return code == 0 ? 1 : code;
}

using ConfigPtr = std::unique_ptr<sead_config, decltype(&sead_config_free)>;

std::optional<int> parse_switch(const std::string& v, const char* flag) {
    if (v.empty()) return std::nullopt;
    if (v == "on" || v == "true" || v == "1") return 1;
    if (v == "off" || v == "false" || v == "0") return 0;
    throw Failure{SEAD_E_INVALID_ARGUMENT, std::string(flag) + " expects on or off, got '" + v + "'"};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phantom-benchmark harness for latent domain harmonization of 3D brain volumes", "sead"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool force = false;
    app.add_option("--config", config_path, "experiment config (JSON); built-in defaults if omitted");
    app.add_option("--seed", seed, "master seed, overrides the config");
    app.add_option("--out", out_dir, "output root, overrides the config");
    app.add_flag("--force", force, "overwrite existing outputs");

    auto* gen = app.add_subcommand("gen-data", "generate the phantom volume store");

    std::string train_method;
    auto* tr = app.add_subcommand("train", "train one model (CAE, ADA, MDADA, SEADA)");
    tr->add_option("--method,-m", train_method, "method to train")->required();

    std::string ex_method, ex_ckpt, ex_data, ex_output;
    auto* ex = app.add_subcommand("extract", "encode every volume of the store with a trained model");
    ex->add_option("--method,-m", ex_method, "model to use, resolved inside the output root");
    ex->add_option("--checkpoint", ex_ckpt, "explicit checkpoint path");
    ex->add_option("--data", ex_data, "explicit volume store directory");
    ex->add_option("--output", ex_output, "explicit latent file path");

    std::string hz_method, hz_eb, hz_cov, hz_input, hz_output;
    double hz_sigma = -1.0;
    auto* hz = app.add_subcommand("harmonize", "post-hoc latent transform of the CAE latents (NOISE, COMBAT)");
    hz->add_option("--method,-m", hz_method, "NOISE or COMBAT")->required();
    hz->add_option("--sigma", hz_sigma, "noise standard deviation (NOISE)");
    hz->add_option("--eb", hz_eb, "empirical-Bayes shrinkage on/off (COMBAT)");
    hz->add_option("--covariates", hz_cov, "disease covariates on/off (COMBAT); default emits both");
    hz->add_option("--input", hz_input, "latent file to transform");
    hz->add_option("--output", hz_output, "output latent file");

    auto* ev = app.add_subcommand("evaluate", "score every configured method and write the report");

    std::string rp_input;
    auto* rp = app.add_subcommand("report", "print the report table");
    rp->add_option("--input", rp_input, "report JSON (default: <out>/report/report.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_failure(SEAD_E_INVALID_ARGUMENT, e.what());
    }

    try {
        sead_config* raw = nullptr;
        check(sead_config_load(config_path.empty() ? nullptr : config_path.c_str(), &raw));
        ConfigPtr cfg(raw, sead_config_free);
        if (seed) check(sead_config_set_seed(cfg.get(), *seed));
        if (!out_dir.empty()) check(sead_config_set_output_dir(cfg.get(), out_dir.c_str()));
        char* od = nullptr;
        check(sead_config_output_dir(cfg.get(), &od));
        const std::string root = take(od);
        const int f = force ? 1 : 0;
        char* summary = nullptr;

        if (*gen) {
            check(sead_cmd_gen_data(cfg.get(), root.c_str(), f, &summary));
        } else if (*tr) {
            check(sead_cmd_train(cfg.get(), train_method.c_str(), root.c_str(), f, &summary));
        } else if (*ex) {
            if (ex_method.empty() && (ex_ckpt.empty() || ex_output.empty()))
                throw Failure{SEAD_E_INVALID_ARGUMENT, "extract needs --method, or both --checkpoint and --output"};
            const std::string ckpt = !ex_ckpt.empty() ? ex_ckpt : root + "/models/" + ex_method + ".ckpt";
            const std::string data = !ex_data.empty() ? ex_data : root + "/data";
            const std::string output = !ex_output.empty() ? ex_output : root + "/ldr/" + ex_method + ".ldr";
            check(sead_cmd_extract(ckpt.c_str(), data.c_str(), output.c_str(), f, &summary));
        } else if (*hz) {
            sead_harmonize_options o;
            sead_harmonize_options_init(&o);
            o.sigma = hz_sigma;
            if (auto v = parse_switch(hz_eb, "--eb")) o.eb = *v;
            if (auto v = parse_switch(hz_cov, "--covariates")) o.covariates = *v;
            if (!hz_input.empty()) o.input = hz_input.c_str();
            if (!hz_output.empty()) o.output = hz_output.c_str();
            check(sead_cmd_harmonize(cfg.get(), hz_method.c_str(), root.c_str(), &o, f, &summary));
        } else if (*ev) {
            check(sead_cmd_evaluate(cfg.get(), root.c_str(), f, &summary));
        } else if (*rp) {
            const std::string in = !rp_input.empty() ? rp_input : root + "/report/report.json";
            check(sead_cmd_report(in.c_str(), &summary));
        }
        std::fputs(take(summary).c_str(), stdout);
        return 0;
    } catch (const Failure& e) {
        return report_failure(e.code, e.message);
    }
}
