#include <doctest.h>

#include <string>

#include "rdd/config.hpp"
#include "rdd/error.hpp"

using namespace rdd;

namespace {

std::string config_error(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("empty config takes the defaults") {
    const auto cfg = parse_config_text("{}");
    CHECK(cfg == RunConfig{});
    CHECK(cfg.schedule.steps == 100);
    CHECK(cfg.svdd.candidates == 10);
    CHECK(cfg.finetune.iterations == 50);
    CHECK(cfg.finetune.samples == 256);
    CHECK_FALSE(cfg.finetune.alpha.has_value());
    CHECK(cfg.model.hidden == std::vector<std::size_t>{256, 256});
}

TEST_CASE("config round trip") {
    RunConfig cfg;
    cfg.svdd.candidates = 3;
    cfg.svdd.alpha = 0.25;
    cfg.finetune.alpha = 2.5;
    cfg.reward.target = {1.0, 2.0, 3.0};
    cfg.dataset.dim = 3;
    cfg.model.hidden = {64, 32, 16};
    cfg.output_dir = "somewhere";
    cfg.threads = 3;
    CHECK(parse_config_text(serialize_config(cfg)) == cfg);
    CHECK(parse_config_text(serialize_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("partial configs and alpha") {
    const auto cfg = parse_config_text(R"({"svdd": {"M": 5}, "finetune": {"alpha": "auto", "S": 7}})");
    CHECK(cfg.svdd.candidates == 5);
    CHECK(cfg.svdd.alpha == 1.0);
    CHECK(cfg.finetune.iterations == 7);
    CHECK_FALSE(cfg.finetune.alpha.has_value());
    CHECK(*parse_config_text(R"({"finetune": {"alpha": 0.5}})").finetune.alpha == 0.5);
}

TEST_CASE("config errors name the key") {
    CHECK(config_error(R"({"svdd": {"M": 0}})").find("svdd.M") != std::string::npos);
    CHECK(config_error(R"({"svdd": {"MM": 3}})").find("svdd.MM") != std::string::npos);
    CHECK(config_error(R"({"bogus": 1})").find("bogus") != std::string::npos);
    CHECK(config_error(R"({"schedule": {"T": "ten"}})").find("schedule.T") != std::string::npos);
    CHECK(config_error(R"({"finetune": {"alpha": -1}})").find("finetune.alpha") != std::string::npos);
    CHECK(config_error(R"({"finetune": {"alpha": "warm"}})").find("finetune.alpha") != std::string::npos);
    CHECK(config_error(R"({"pretrain": {"epochs": -3}})").find("pretrain.epochs") != std::string::npos);
    CHECK(config_error(R"({"reward": {"kind": "magic"}})").find("reward.kind") != std::string::npos);
    CHECK_FALSE(config_error("{ not json").empty());
    CHECK_FALSE(config_error("[1, 2]").empty());
    CHECK_THROWS_AS(parse_config("/nonexistent/cfg.json"), ConfigError);
}

TEST_CASE("derived configs") {
    RunConfig cfg;
    cfg.model.hidden = {8};
    cfg.model.embed_dim = 4;
    const auto arch = make_arch(cfg, 3);
    CHECK(arch.dim == 3);
    CHECK(arch.hidden == std::vector<std::size_t>{8});
    CHECK(arch.steps == 100);
    const auto ft = make_finetune_config(cfg, 0.7);
    CHECK(ft.alpha == 0.7);
    CHECK(ft.iterations == 50);
    const auto sv = make_svdd_config(cfg);
    CHECK(sv.candidates == 10);
    CHECK(sv.seed == 2);
    CHECK(make_boost_config(cfg).n_trees == 200);
}
