#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdd/config.hpp"
#include "rdd/error.hpp"
#include "rdd/log.hpp"
#include "rdd/pipeline.hpp"

namespace {

struct Overrides {
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<int> S;
    std::optional<std::size_t> m;
    std::optional<double> ft_alpha;
    std::optional<std::size_t> M;
    std::optional<double> alpha;
    std::optional<std::size_t> n_traj;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> rows;
    std::optional<int> epochs;
};

void apply(rdd::RunConfig& cfg, const Overrides& o, const std::string& command) {
    if (o.out) cfg.output_dir = *o.out;
    if (o.threads) cfg.threads = *o.threads;
    if (o.S) cfg.finetune.iterations = *o.S;
    if (o.m) cfg.finetune.samples = *o.m;
    if (o.ft_alpha) cfg.finetune.alpha = *o.ft_alpha;
    if (o.M) cfg.svdd.candidates = *o.M;
    if (o.alpha) cfg.svdd.alpha = *o.alpha;
    if (o.n_traj) cfg.svdd.n_traj = *o.n_traj;
    if (o.rows) cfg.dataset.rows = *o.rows;
    if (o.epochs) cfg.pretrain.epochs = *o.epochs;
    if (o.seed) {
        if (command == "sample") cfg.svdd.seed = *o.seed;
        else if (command == "finetune") cfg.finetune.seed = *o.seed;
        else if (command == "pretrain") cfg.pretrain.seed = *o.seed;
        else if (command == "dataset") cfg.dataset.seed = *o.seed;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rdd: reward-directed diffusion for design optimisation"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    bool verbose = false, quiet = false;
    Overrides o;
    rdd::Command cmd;
    app.add_option("-c,--config", config_path, "JSON run config (missing keys take defaults)");
    app.add_option("-o,--out", o.out, "output directory (overrides output_dir)");
    app.add_option("-j,--threads", o.threads, "worker threads (default: RDD_THREADS or all cores)");
    app.add_flag("-v,--verbose", verbose, "debug logging");
    app.add_flag("-q,--quiet", quiet, "warnings and errors only");

    auto* pretrain = app.add_subcommand("pretrain", "train the denoiser on a dataset");
    pretrain->add_option("--data", cmd.data, "training CSV (default: dataset section of the config)");
    pretrain->add_option("--epochs", o.epochs, "training epochs");
    pretrain->add_option("--seed", o.seed, "pretraining seed");

    auto* finetune = app.add_subcommand("finetune", "reward-weighted fine-tuning of a pretrained model");
    finetune->add_option("--model", cmd.model, "pretrained model (default: <out>/model_pretrained.rddm)");
    finetune->add_option("--data", cmd.data, "training CSV used to set alpha = auto");
    finetune->add_option("--S", o.S, "iterations");
    finetune->add_option("--m", o.m, "trajectories per iteration");
    finetune->add_option("--alpha", o.ft_alpha, "reward temperature");
    finetune->add_option("--seed", o.seed, "fine-tuning seed");

    auto* sample = app.add_subcommand("sample", "reward-directed sampling (M = 1: plain ancestral sampling)");
    sample->add_option("--model", cmd.model, "model (default: <out>/model_finetuned.rddm)");
    sample->add_option("--M", o.M, "candidates per reverse step");
    sample->add_option("--alpha", o.alpha, "selection temperature (0: argmax)");
    sample->add_option("--n-traj", o.n_traj, "number of trajectories");
    sample->add_option("--seed", o.seed, "sampling seed");
    sample->add_option("--name", cmd.samples, "output file name inside <out> (default samples.csv)");

    auto* eval = app.add_subcommand("eval", "reward statistics, density and beyond-distribution measures");
    eval->add_option("--samples", cmd.samples, "samples CSV (default: <out>/samples.csv)");
    eval->add_option("--training", cmd.training, "training CSV (default: dataset section of the config)");

    auto* surrogate = app.add_subcommand("surrogate", "boosted-tree reward surrogate");
    surrogate->require_subcommand(1);
    surrogate->fallthrough();
    auto* sfit = surrogate->add_subcommand("fit", "fit on a CSV with a reward column (80/20 split by default)");
    sfit->add_option("--data", cmd.data, "training CSV");
    sfit->add_option("--model", cmd.surrogate, "output RDDT path (default: <out>/surrogate.rddt)");
    auto* seval = surrogate->add_subcommand("eval", "predict a CSV and report R^2 when it has rewards");
    seval->add_option("--data", cmd.data, "CSV to predict");
    seval->add_option("--model", cmd.surrogate, "RDDT model (default: <out>/surrogate.rddt)");

    auto* hull = app.add_subcommand("hull", "analytic hull resistance");
    hull->require_subcommand(1);
    hull->fallthrough();
    auto* heval = hull->add_subcommand("eval", "resistance over the Froude x draft grid");
    heval->add_option("--params", cmd.hull_params, "six hull parameters p1..p6")->expected(6);
    heval->add_option("--data", cmd.data, "CSV of parameter rows");

    auto* dataset = app.add_subcommand("dataset", "generate a benchmark dataset");
    dataset->require_subcommand(1);
    dataset->fallthrough();
    auto* dsyn = dataset->add_subcommand("synthetic", "rows ~ N(0, I)");
    auto* dhull = dataset->add_subcommand("hull", "random hulls labelled with the hull reward");
    for (auto* d : {dsyn, dhull}) {
        d->add_option("--rows", o.rows, "number of rows");
        d->add_option("--seed", o.seed, "dataset seed");
        d->add_option("--file", cmd.data, "output CSV (default: <out>/dataset.csv)");
    }

    app.add_subcommand("run", "full pipeline: dataset, pretrain, finetune, sample, eval");
    auto* show = app.add_subcommand("config", "print the resolved config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(rdd::ExitCode::usage);
    }

    if (verbose) rdd::log::set_level(rdd::log::Level::debug);
    if (quiet) rdd::log::set_level(rdd::log::Level::warn);

    CLI::App* sub = app.get_subcommands().front();
    cmd.name = sub->get_name();
    if (!sub->get_subcommands().empty()) cmd.action = sub->get_subcommands().front()->get_name();

    rdd::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = rdd::parse_config(config_path);
        apply(cfg, o, cmd.name);
        cfg.validate();
    } catch (const rdd::Error& e) {
        std::cerr << "error[usage]: " << e.what() << '\n';
        return static_cast<int>(rdd::ExitCode::usage);
    }
    if (sub == show) {
        std::cout << rdd::serialize_config(cfg);
        return 0;
    }
    return rdd::run_pipeline(cfg, cmd);
}
