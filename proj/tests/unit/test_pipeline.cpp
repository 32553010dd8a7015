#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "rdd/error.hpp"
#include "rdd/io.hpp"
#include "rdd/pipeline.hpp"
#include "support.hpp"

using namespace rdd;

namespace {

RunConfig tiny(const std::string& out, unsigned threads) {
    RunConfig cfg;
    cfg.schedule.steps = 10;
    cfg.schedule.beta_end = 0.2;
    cfg.model.hidden = {16, 16};
    cfg.model.embed_dim = 8;
    cfg.pretrain.epochs = 3;
    cfg.pretrain.batch_size = 64;
    cfg.dataset.rows = 200;
    cfg.finetune.iterations = 3;
    cfg.finetune.samples = 32;
    cfg.finetune.batch_size = 16;
    cfg.svdd.n_traj = 40;
    cfg.svdd.candidates = 3;
    cfg.svdd.chunk = 7;
    cfg.eval.kde_points = 64;
    cfg.output_dir = out;
    cfg.threads = threads;
    return cfg;
}

}  // namespace

TEST_CASE("full run writes its outputs and is reproducible across thread counts") {
    test::TempDir a, b;
    Command run;
    run.name = "run";
    {
        test::LogCapture quiet;
        CHECK(run_pipeline(tiny(a.str(), 1), run) == 0);
        CHECK(run_pipeline(tiny(b.str(), 3), run) == 0);
    }
    for (const char* f : {"dataset.csv", "model_pretrained.rddm", "model_finetuned.rddm", "samples.csv",
                          "samples_pretrained.csv", "stats.json", "history.csv", "config.json", "run.log"}) {
        CHECK_MESSAGE(std::filesystem::exists(a.file(f)), f);
    }
    const std::string samples = test::read_file(a.file("samples.csv"));
    CHECK_FALSE(samples.empty());
    CHECK(samples == test::read_file(b.file("samples.csv")));
    CHECK(test::read_file(a.file("model_finetuned.rddm")) == test::read_file(b.file("model_finetuned.rddm")));
    const auto d = load_dataset(a.file("samples.csv"));
    CHECK(d.size() == 40);
    CHECK(d.rewards.has_value());
    CHECK(parse_config(a.file("config.json")) == tiny(a.str(), 1));
}

TEST_CASE("command errors map to exit codes") {
    test::TempDir dir;
    auto cfg = tiny(dir.str(), 1);
    Command sample;
    sample.name = "sample";
    sample.model = dir.file("missing.rddm");
    test::LogCapture quiet;
    CHECK(run_pipeline(cfg, sample) == 2);

    Command pre;
    pre.name = "pretrain";
    cfg.reward.target = {1.0};
    CHECK(run_pipeline(cfg, pre) == 0);
    Command run;
    run.name = "run";
    CHECK(run_pipeline(cfg, run) == 1);
}

TEST_CASE("dataset and hull commands") {
    test::TempDir dir;
    auto cfg = tiny(dir.str(), 2);
    cfg.dataset.rows = 12;
    cfg.hull.lambda_nodes = 64;
    Command ds;
    ds.name = "dataset";
    ds.action = "hull";
    test::LogCapture quiet;
    REQUIRE(run_pipeline(cfg, ds) == 0);
    const auto d = load_dataset(dir.file("dataset.csv"));
    CHECK(d.dim() == 6);
    REQUIRE(d.rewards.has_value());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK((*d.rewards)[i] == doctest::Approx(hull_reward(d.rows.row(i), cfg.reward, cfg.hull)).epsilon(1e-15));
    }
    Command he;
    he.name = "hull";
    he.action = "eval";
    he.hull_params = {0.25, 0.25, 0.14, 0.085, 0.65, 0.65};
    CHECK(run_pipeline(cfg, he) == 0);
    CHECK(std::filesystem::exists(dir.file("hull_eval.json")));
}

TEST_CASE("reward factory") {
    RunConfig cfg;
    CHECK(make_reward(cfg.reward, cfg.hull, 2)->dim() == 2);
    CHECK_THROWS_AS(make_reward(cfg.reward, cfg.hull, 3), ConfigError);
    cfg.reward.kind = "hull";
    CHECK(make_reward(cfg.reward, cfg.hull, 6)->dim() == 6);
    CHECK_THROWS_AS(make_reward(cfg.reward, cfg.hull, 2), ConfigError);
    // Infeasible parameters are projected and penalised, never rejected.
    const auto r = make_reward(cfg.reward, cfg.hull, 6);
    const std::vector<double> bad{0.8, 0.8, 0.1, 0.1, 0.5, 0.5};
    const std::vector<double> fixed{0.5, 0.5, 0.1, 0.1, 0.5, 0.5};
    CHECK(r->evaluate(bad) == doctest::Approx(r->evaluate(fixed) - 10.0 * 0.6));
    CHECK(auto_alpha(std::vector<double>{-3.0, 3.0, 0.0}) == 1.0);
    CHECK(auto_alpha(std::vector<double>{2.0, 2.0}) == 1.0);
}
