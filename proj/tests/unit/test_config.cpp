#include "helpers.hpp"

#include "sead/config/config.hpp"
#include "sead/core/error.hpp"

#include <doctest.h>

#include <fstream>

using namespace sead;
using namespace sead::config;

namespace {

ErrorCode code_of(const std::string& text) {
    try {
        parse_experiment_config(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error for " << text);
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("defaults validate and survive a JSON round trip") {
    const auto def = default_experiment_config();
    CHECK_NOTHROW(def.validate());
    CHECK(def.methods.size() == 6);
    CHECK(def.phantom.domains.size() == 7);
    const auto text = experiment_config_to_json(def);
    const auto back = parse_experiment_config(text);
    CHECK(experiment_config_to_json(back) == text);
    CHECK(parse_experiment_config(R"({"schema_version": 1})").seed == def.seed);
}

TEST_CASE("sub-seeds are distinct functions of the master seed") {
    auto c = default_experiment_config();
    const std::set<std::uint64_t> seeds{c.phantom_seed(), c.train_seed(), c.split_seed(), c.eval_seed(), c.noise_seed()};
    CHECK(seeds.size() == 5);
    const auto t = c.train_seed();
    c.seed = 2;
    CHECK(c.train_seed() != t);
    CHECK(c.phantom_config().seed == c.phantom_seed());
    CHECK(c.train_config(nets::Method::ADA).seed == c.train_seed());
    CHECK(c.train_config(nets::Method::ADA).method == nets::Method::ADA);
}

TEST_CASE("partial overrides keep the other defaults") {
    const auto c = parse_experiment_config(R"({
        "schema_version": 1, "seed": 9,
        "train": {"defaults": {"epochs": 3}, "SEADA": {"lr_stage3": 0.5}},
        "eval": {"knn_k": 3},
        "methods": ["CAE", "SEADA"]
    })");
    CHECK(c.seed == 9);
    CHECK(c.train_config(nets::Method::CAE).epochs == 3);
    CHECK(c.train_config(nets::Method::SEADA).epochs == 3);
    CHECK(c.train_config(nets::Method::SEADA).lr_stage3 == 0.5);
    CHECK(c.train_config(nets::Method::ADA).lr_stage3 == default_experiment_config().train_config(nets::Method::ADA).lr_stage3);
    CHECK(c.eval.knn_k == 3);
    CHECK(c.methods == std::vector<std::string>{"CAE", "SEADA"});
}

TEST_CASE("bad configs are rejected") {
    CHECK(code_of("{}") != ErrorCode::InvalidArgument); // schema_version is required
    CHECK(code_of(R"({"schema_version": 1, "sede": 3})") == ErrorCode::Format);
    CHECK(code_of(R"({"schema_version": 1, "eval": {"knn": 3}})") == ErrorCode::Format);
    CHECK(code_of(R"({"schema_version": 1, "train": {"SEADA": {"lr": 1}}})") == ErrorCode::Format);
    CHECK(code_of(R"({"schema_version": 2})") != ErrorCode::InvalidArgument);
    CHECK(code_of("not json") == ErrorCode::Format);
    CHECK_THROWS(parse_experiment_config(R"({"schema_version": 1, "methods": ["SEADA"]})"));
    CHECK_THROWS(parse_experiment_config(R"({"schema_version": 1, "methods": ["CAE", "CAE"]})"));
    CHECK_THROWS(parse_experiment_config(R"({"schema_version": 1, "methods": ["CAE", "PCA"]})"));
    CHECK_THROWS(parse_experiment_config(R"({"schema_version": 1, "train": {"defaults": {"epochs": 0}}})"));
    CHECK_THROWS(parse_experiment_config(R"({"schema_version": 1, "seed": "one"})"));
}

TEST_CASE("loading names the file") {
    const auto dir = testutil::temp_dir("config");
    CHECK_THROWS_AS(load_experiment_config(dir / "missing.json"), Error);
    {
        std::ofstream(dir / "bad.json") << R"({"schema_version": 1, "bogus": true})";
    }
    try {
        load_experiment_config(dir / "bad.json");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("method classification") {
    CHECK(is_pipeline_method("NOISE"));
    CHECK(is_pipeline_method("COMBAT"));
    CHECK(is_trained_method("SEADA"));
    CHECK_FALSE(is_trained_method("COMBAT"));
    CHECK_FALSE(is_pipeline_method("PCA"));
}
