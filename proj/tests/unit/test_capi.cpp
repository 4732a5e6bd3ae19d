// Links only the shared library; the CLI is exercised as a subprocess.
#include "sead/sead.h"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

const std::string kTiny = std::string(SEAD_TEST_DATA_DIR) + "/tiny.json";

fs::path scratch(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("sead-capi-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

std::string take(char* s) {
    std::string out = s ? s : "";
    sead_string_free(s);
    return out;
}

struct Run {
    int code = -1;
    std::string out, err;
};

Run run_cli(const std::string& args, const fs::path& dir) {
    fs::create_directories(dir);
    const auto o = dir / "stdout.txt", e = dir / "stderr.txt";
    const std::string cmd = std::string(SEAD_CLI_PATH) + " " + args + " >" + o.string() + " 2>" + e.string();
    const int st = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
}

struct Config {
    sead_config* p = nullptr;
    Config() { REQUIRE(sead_config_load(kTiny.c_str(), &p) == SEAD_OK); }
    ~Config() { sead_config_free(p); }
};

} // namespace

TEST_CASE("status names and error messages") {
    CHECK(std::string(sead_status_name(SEAD_OK)) == "ok");
    CHECK(std::string(sead_status_name(SEAD_E_EXISTS)) == "exists");
    CHECK(std::string(sead_version()).size() > 0);

    sead_config* cfg = nullptr;
    CHECK(sead_config_load("/nonexistent/x.json", &cfg) == SEAD_E_NOT_FOUND);
    CHECK(cfg == nullptr);
    CHECK(std::string(sead_last_error_message()).find("/nonexistent/x.json") != std::string::npos);
    CHECK(sead_config_load(nullptr, nullptr) == SEAD_E_INVALID_ARGUMENT);

    REQUIRE(sead_config_load(nullptr, &cfg) == SEAD_OK);
    CHECK(sead_config_set_seed(cfg, 11) == SEAD_OK);
    char* json = nullptr;
    REQUIRE(sead_config_to_json(cfg, &json) == SEAD_OK);
    CHECK(take(json).find("\"seed\": 11") != std::string::npos);
    sead_config_free(cfg);
}

TEST_CASE("pipeline through the C API") {
    Config cfg;
    const auto root = scratch("pipe");
    const std::string r = root.string();

    char* text = nullptr;
    REQUIRE(sead_cmd_gen_data(cfg.p, r.c_str(), 0, &text) == SEAD_OK);
    CHECK(take(text).find("total") != std::string::npos);

    sead_store* store = nullptr;
    REQUIRE(sead_store_load((root / "data").c_str(), &store) == SEAD_OK);
    std::size_t n = 0;
    std::uint64_t d1 = 0, d2 = 0;
    CHECK(sead_store_count(store, &n) == SEAD_OK);
    CHECK(n == 58);
    CHECK(sead_store_digest(store, &d1) == SEAD_OK);

    // second run: refused without force, identical with force
    CHECK(sead_cmd_gen_data(cfg.p, r.c_str(), 0, nullptr) == SEAD_E_EXISTS);
    REQUIRE(sead_cmd_gen_data(cfg.p, r.c_str(), 1, nullptr) == SEAD_OK);
    sead_store* again = nullptr;
    REQUIRE(sead_store_load((root / "data").c_str(), &again) == SEAD_OK);
    CHECK(sead_store_digest(again, &d2) == SEAD_OK);
    CHECK(d1 == d2);
    sead_store_free(again);

    CHECK(sead_cmd_train(cfg.p, "COMBAT", r.c_str(), 0, nullptr) == SEAD_E_INVALID_ARGUMENT);
    CHECK(std::string(sead_last_error_message()).find("harmonize") != std::string::npos);
    CHECK(sead_cmd_evaluate(cfg.p, r.c_str(), 0, nullptr) == SEAD_E_NOT_FOUND);

    REQUIRE(sead_cmd_train(cfg.p, "CAE", r.c_str(), 0, nullptr) == SEAD_OK);
    CHECK(fs::exists(root / "models" / "CAE.loss.tsv"));
    sead_model* model = nullptr;
    REQUIRE(sead_model_load((root / "models" / "CAE.ckpt").c_str(), &model) == SEAD_OK);
    int dim = 0;
    CHECK(sead_model_latent_dim(model, &dim) == SEAD_OK);
    CHECK(dim == 8);
    char* method = nullptr;
    CHECK(sead_model_method(model, &method) == SEAD_OK);
    CHECK(take(method) == "CAE");

    sead_ldr* ldr = nullptr;
    REQUIRE(sead_model_extract(model, store, &ldr) == SEAD_OK);
    std::size_t rows = 0;
    int ldim = 0;
    CHECK(sead_ldr_shape(ldr, &rows, &ldim) == SEAD_OK);
    CHECK(rows == 58);
    CHECK(ldim == 8);
    std::vector<float> a(rows * ldim), b(rows * ldim);
    CHECK(sead_ldr_values(ldr, a.data(), a.size()) == SEAD_OK);
    CHECK(sead_ldr_values(ldr, a.data(), a.size() - 1) == SEAD_E_INVALID_ARGUMENT);
    const auto path = (root / "x.ldr").string();
    CHECK(sead_ldr_save(ldr, path.c_str()) == SEAD_OK);
    sead_ldr* loaded = nullptr;
    REQUIRE(sead_ldr_load(path.c_str(), &loaded) == SEAD_OK);
    CHECK(sead_ldr_values(loaded, b.data(), b.size()) == SEAD_OK);
    CHECK(a == b);

    // the extract command writes the same matrix
    const auto cmd_out = (root / "ldr" / "CAE.ldr").string();
    REQUIRE(sead_cmd_extract((root / "models" / "CAE.ckpt").c_str(), (root / "data").c_str(), cmd_out.c_str(), 0,
                             nullptr) == SEAD_OK);
    sead_ldr* from_cmd = nullptr;
    REQUIRE(sead_ldr_load(cmd_out.c_str(), &from_cmd) == SEAD_OK);
    std::vector<float> c(rows * ldim);
    CHECK(sead_ldr_values(from_cmd, c.data(), c.size()) == SEAD_OK);
    CHECK(a == c);

    // NOISE with sigma 0 is the identity
    sead_harmonize_options opts;
    sead_harmonize_options_init(&opts);
    opts.sigma = 0.0;
    REQUIRE(sead_cmd_harmonize(cfg.p, "NOISE", r.c_str(), &opts, 0, nullptr) == SEAD_OK);
    sead_ldr* noise = nullptr;
    REQUIRE(sead_ldr_load((root / "ldr" / "NOISE.ldr").c_str(), &noise) == SEAD_OK);
    CHECK(sead_ldr_values(noise, c.data(), c.size()) == SEAD_OK);
    CHECK(a == c);
    CHECK(sead_cmd_harmonize(cfg.p, "SEADA", r.c_str(), nullptr, 0, nullptr) == SEAD_E_INVALID_ARGUMENT);

    // COMBAT skips exactly the test-domain rows
    REQUIRE(sead_cmd_harmonize(cfg.p, "COMBAT", r.c_str(), nullptr, 0, nullptr) == SEAD_OK);
    std::ifstream skipped(root / "ldr" / "COMBAT.skipped.tsv");
    std::string line;
    int skipped_rows = 0;
    std::getline(skipped, line); // header
    while (std::getline(skipped, line))
        if (!line.empty()) ++skipped_rows;
    CHECK(skipped_rows == 10);

    for (auto* p : {noise, from_cmd, loaded, ldr}) sead_ldr_free(p);
    sead_model_free(model);
    sead_store_free(store);
    fs::remove_all(root);
}

TEST_CASE("CLI exit codes and error lines") {
    const auto root = scratch("cli");
    const std::string base = "--config " + kTiny + " --out " + (root / "run").string();

    const auto bad = run_cli(base + " train --method COMBAT", root);
    CHECK(bad.code != 0);
    CHECK(bad.err.rfind("error[SEAD-E", 0) == 0);
    CHECK(std::count(bad.err.begin(), bad.err.end(), '\n') == 1);
    CHECK(bad.err.find("harmonize") != std::string::npos);

    const auto unknown = run_cli("frobnicate", root);
    CHECK(unknown.code == SEAD_E_INVALID_ARGUMENT);
    CHECK(unknown.err.rfind("error[SEAD-E001]", 0) == 0);

    const auto missing = run_cli("--config /nonexistent.json gen-data", root);
    CHECK(missing.code == SEAD_E_NOT_FOUND);
    CHECK(missing.err.rfind("error[SEAD-E006]", 0) == 0);

    const auto gen = run_cli(base + " gen-data", root);
    CHECK(gen.code == 0);
    CHECK(gen.out.find("total") != std::string::npos);
    const auto again = run_cli(base + " gen-data", root);
    CHECK(again.code == SEAD_E_EXISTS);
    CHECK(again.err.rfind("error[SEAD-E007]", 0) == 0);
    CHECK(run_cli(base + " --force gen-data", root).code == 0);
    CHECK(run_cli(base + " --seed 5 --force gen-data", root).code == 0);

    const auto report = run_cli("report --input " + (root / "nothing.json").string(), root);
    CHECK(report.code == SEAD_E_NOT_FOUND);
    fs::remove_all(root);
}
