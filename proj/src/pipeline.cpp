#include "rdd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "rdd/error.hpp"
#include "rdd/finetune.hpp"
#include "rdd/hull.hpp"
#include "rdd/log.hpp"
#include "rdd/metrics.hpp"
#include "rdd/parallel.hpp"
#include "rdd/surrogate.hpp"
#include "rdd/svdd.hpp"

namespace rdd {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string out_path(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.output_dir) / name).string(); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("failed writing " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string fixed(double v, int digits = 3) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

json summary_json(const SummaryStats& s) {
    return {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"min", s.min}, {"max", s.max}, {"stddev", s.stddev}};
}

json boxplot_json(const BoxplotStats& b) {
    return {{"median", b.median},
            {"q1", b.q1},
            {"q3", b.q3},
            {"iqr", b.iqr},
            {"lower_whisker", b.lower_whisker},
            {"upper_whisker", b.upper_whisker},
            {"outliers", b.outliers.size()}};
}

json beyond_json(const BeyondDistribution& b) {
    return {{"fraction_above_training_max", b.fraction_above_max},
            {"mean_shift", b.mean_shift},
            {"relative_improvement", b.relative_improvement},
            {"training_max", b.training_max},
            {"sample_mean", b.sample_mean},
            {"training_mean", b.training_mean}};
}

Dataset load_training(const RunConfig& cfg, const std::string& override_path) {
    if (!override_path.empty()) return load_dataset(override_path);
    const auto& d = cfg.dataset;
    if (d.source == "file") return load_dataset(d.path);
    if (d.source == "hull") return make_hull_dataset(d.rows, d.seed, cfg.reward, cfg.hull, cfg.resolved_threads());
    return make_synthetic_dataset(d.rows, d.dim, d.seed);
}

std::vector<double> rewards_of(const RewardModel& reward, const Matrix& rows, unsigned threads) {
    std::vector<double> out(rows.rows);
    parallel_chunks(rows.rows, 16, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = reward.evaluate(rows.row(i));
    });
    return out;
}

ModelFile load_model_or(const RunConfig& cfg, const std::string& path, const char* fallback) {
    const std::string p = path.empty() ? out_path(cfg, fallback) : path;
    if (!fs::exists(p)) throw IoError("model file not found: " + p);
    return load_model(p);
}

void save_checkpoint(const RunConfig& cfg, const ModelFile& base, const TrainingAborted& err, RunLog& log) {
    ModelFile ck = base;
    ck.params = err.checkpoint;
    const auto path = out_path(cfg, "checkpoint.rddm");
    save_model(path, ck);
    log.line("training diverged; last finite parameters saved to " + path);
}

ModelFile do_pretrain(const RunConfig& cfg, const Dataset& data, RunLog& log) {
    auto [rows, stats] = normalize(data.rows);
    const NoiseSchedule sched = cfg.schedule.make();
    TrainConfig tc;
    tc.epochs = cfg.pretrain.epochs;
    tc.batch_size = cfg.pretrain.batch_size;
    tc.seed = cfg.pretrain.seed;
    tc.adam.learning_rate = cfg.pretrain.learning_rate;
    ModelFile model{DenoiserParams{}, schedule_betas(sched), stats};
    const auto arch = make_arch(cfg, data.dim());
    log.line("pretrain: " + std::to_string(data.size()) + " rows, d = " + std::to_string(data.dim()) + ", " +
             std::to_string(arch.parameter_count()) + " parameters, " + std::to_string(tc.epochs) + " epochs");
    std::ostringstream loss_csv;
    loss_csv << "epoch,loss\n";
    try {
        auto res = train_ddpm(rows, sched, arch, tc, [&](int e, double loss) {
            loss_csv << e + 1 << ',' << format_double(loss) << '\n';
            if ((e + 1) % 20 == 0 || e + 1 == tc.epochs) log.line("pretrain: epoch " + std::to_string(e + 1) + " loss " + fixed(loss, 5));
        });
        model.params = std::move(res.params);
    } catch (const TrainingAborted& err) {
        model.params = DenoiserParams::zeros(arch);
        save_checkpoint(cfg, model, err, log);
        throw;
    }
    write_text(out_path(cfg, "pretrain_loss.csv"), loss_csv.str());
    save_model(out_path(cfg, "model_pretrained.rddm"), model);
    log.line("pretrain: wrote model_pretrained.rddm");
    return model;
}

struct FinetuneOutcome {
    ModelFile model;
    double alpha = 0.0;
    double anchor_divergence = 0.0;
    std::vector<FinetuneRecord> history;
};

FinetuneOutcome do_finetune(const RunConfig& cfg, const ModelFile& pre, const RewardModel& reward,
                            const std::vector<double>* training_rewards, RunLog& log) {
    double alpha = 0.0;
    if (cfg.finetune.alpha) {
        alpha = *cfg.finetune.alpha;
    } else {
        if (!training_rewards) throw ConfigError("finetune.alpha: \"auto\" needs training rewards");
        alpha = auto_alpha(*training_rewards);
        log.line("finetune: alpha = " + format_double(alpha) + " (from training reward spread)");
    }
    const auto fc = make_finetune_config(cfg, alpha);
    const NoiseSchedule sched = pre.schedule();
    FinetuneOutcome outcome{pre, alpha, 0.0, {}};
    try {
        auto res = finetune(pre.params, reward, pre.stats, fc, sched, [&](const FinetuneRecord& r) {
            if (r.iteration % 10 == 0 || r.iteration == fc.iterations) {
                log.line("finetune: iteration " + std::to_string(r.iteration) + " k = " + std::to_string(r.switch_k) +
                         " mean reward " + format_double(r.mean_reward));
            }
        });
        outcome.model.params = std::move(res.params);
        outcome.history = std::move(res.history);
        outcome.anchor_divergence = res.anchor_divergence;
    } catch (const TrainingAborted& err) {
        save_checkpoint(cfg, pre, err, log);
        throw;
    }
    std::ostringstream hist;
    hist << "iteration,switch_k,mean_reward,mean_loss\n";
    for (const auto& r : outcome.history) {
        hist << r.iteration << ',' << r.switch_k << ',' << format_double(r.mean_reward) << ',' << format_double(r.mean_loss) << '\n';
    }
    write_text(out_path(cfg, "history.csv"), hist.str());
    save_model(out_path(cfg, "model_finetuned.rddm"), outcome.model);
    log.line("finetune: wrote model_finetuned.rddm and history.csv");
    return outcome;
}

struct SampleOutcome {
    Matrix designs;  // physical units
    std::vector<double> rewards;
};

SampleOutcome do_sample(const RunConfig& cfg, const ModelFile& model, const RewardModel& reward,
                        const std::string& name, RunLog& log) {
    const auto t0 = log.elapsed();
    const auto sc = make_svdd_config(cfg);
    const auto trajectories = svdd_generate(model.params, model.schedule(), sc, reward, model.stats);
    SampleOutcome out;
    out.designs = Matrix(trajectories.size(), model.params.arch.dim);
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto x = denormalize(trajectories[i].x0, model.stats);
        std::copy(x.begin(), x.end(), out.designs.row(i).begin());
        out.rewards.push_back(trajectories[i].reward);
    }
    save_samples(out_path(cfg, name), out.designs, out.rewards);
    const double secs = log.elapsed() - t0;
    const auto s = summarize(out.rewards);
    json summary = {{"samples", name},
                    {"M", sc.candidates},
                    {"alpha", sc.alpha},
                    {"n_traj", sc.n_traj},
                    {"seed", sc.seed},
                    {"reward", summary_json(s)},
                    {"wall_clock_seconds", secs}};
    write_json(out_path(cfg, "summary.json"), summary);
    log.line("sample: " + std::to_string(sc.n_traj) + " trajectories, M = " + std::to_string(sc.candidates) +
             ", mean reward " + format_double(s.mean) + ", " + fixed(secs) + " s");
    return out;
}

json eval_json(const RunConfig& cfg, std::span<const double> rewards, std::span<const double> training, const char* density_name) {
    const auto box = boxplot_stats(rewards);
    const double bw = silverman_bandwidth(rewards);
    const auto grid = kde_grid(rewards, bw, cfg.eval.kde_points);
    const auto dens = kde(rewards, bw, grid);
    std::ostringstream csv;
    csv << "# reward,density\n";
    for (std::size_t i = 0; i < grid.size(); ++i) csv << format_double(grid[i]) << ',' << format_double(dens[i]) << '\n';
    write_text(out_path(cfg, density_name), csv.str());
    json j = {{"summary", summary_json(summarize(rewards))},
              {"boxplot", boxplot_json(box)},
              {"kde_bandwidth", bw},
              {"kde_integral", trapezoid(grid, dens)}};
    if (!training.empty()) j["beyond_distribution"] = beyond_json(beyond_distribution(rewards, training));
    return j;
}

void cmd_eval(const RunConfig& cfg, const Command& cmd, const RewardModel* reward, RunLog& log) {
    const std::string path = cmd.samples.empty() ? out_path(cfg, "samples.csv") : cmd.samples;
    const Dataset samples = load_dataset(path);
    std::vector<double> rewards;
    if (samples.rewards) rewards = *samples.rewards;
    else if (reward) rewards = rewards_of(*reward, samples.rows, cfg.resolved_threads());
    else throw ParseError(path + ": no reward column");
    std::vector<double> training;
    if (!cmd.training.empty() || cfg.dataset.source != "file" || !cfg.dataset.path.empty()) {
        const Dataset train = load_training(cfg, cmd.training);
        if (reward) training = rewards_of(*reward, train.rows, cfg.resolved_threads());
        else if (train.rewards) training = *train.rewards;
    }
    json j = eval_json(cfg, rewards, training, "density.csv");
    j["samples"] = path;
    write_json(out_path(cfg, "stats.json"), j);
    log.line("eval: wrote stats.json and density.csv for " + std::to_string(rewards.size()) + " samples");
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double test_fraction,
                                                                           std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(idx);
    const auto n_test = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n))));
    if (n_test + 10 > n) throw ArgumentError("surrogate: too few rows for the requested split");
    std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    return {train, test};
}

Matrix take_rows(const Matrix& m, std::span<const std::size_t> idx) {
    Matrix out(idx.size(), m.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) std::copy(m.row(idx[i]).begin(), m.row(idx[i]).end(), out.row(i).begin());
    return out;
}

void cmd_surrogate(const RunConfig& cfg, const Command& cmd, RunLog& log) {
    if (cmd.action == "fit") {
        const Dataset data = load_training(cfg, cmd.data);
        if (!data.rewards) throw ParseError("surrogate fit: dataset has no reward column");
        const auto [train, test] = split_indices(data.size(), cfg.surrogate.test_fraction, cfg.surrogate.seed);
        std::vector<double> y_train, y_test;
        for (auto i : train) y_train.push_back((*data.rewards)[i]);
        for (auto i : test) y_test.push_back((*data.rewards)[i]);
        const Matrix x_train = take_rows(data.rows, train), x_test = take_rows(data.rows, test);
        const auto res = fit_boosted_trees(x_train, y_train, make_boost_config(cfg));
        const double r2_train = r2_score(predict(res.model, x_train), y_train);
        const double r2_test = r2_score(predict(res.model, x_test), y_test);
        bool monotone = true;
        for (std::size_t k = 1; k < res.train_mse.size(); ++k) monotone = monotone && res.train_mse[k] <= res.train_mse[k - 1];
        const std::string path = cmd.surrogate.empty() ? out_path(cfg, "surrogate.rddt") : cmd.surrogate;
        save_trees(path, res.model);
        write_json(out_path(cfg, "surrogate_fit.json"), {{"model", path},
                                                         {"n_train", train.size()},
                                                         {"n_test", test.size()},
                                                         {"r2_train", r2_train},
                                                         {"r2_test", r2_test},
                                                         {"train_mse_initial", res.train_mse.front()},
                                                         {"train_mse_final", res.train_mse.back()},
                                                         {"mse_monotone", monotone}});
        log.line("surrogate fit: held-out R^2 " + fixed(r2_test, 4) + ", wrote " + path);
        std::cout << "r2_test " << format_double(r2_test) << '\n';
    } else if (cmd.action == "eval") {
        const std::string path = cmd.surrogate.empty() ? out_path(cfg, "surrogate.rddt") : cmd.surrogate;
        if (!fs::exists(path)) throw IoError("surrogate model not found: " + path);
        const TreeEnsemble model = load_trees(path);
        const Dataset data = load_training(cfg, cmd.data);
        const auto pred = predict(model, data.rows);
        json j = {{"model", path}, {"rows", data.size()}};
        if (data.rewards) {
            const double r2 = r2_score(pred, *data.rewards);
            j["r2"] = r2;
            std::cout << "r2 " << format_double(r2) << '\n';
        }
        save_samples(out_path(cfg, "surrogate_predictions.csv"), data.rows, pred);
        write_json(out_path(cfg, "surrogate_eval.json"), j);
        log.line("surrogate eval: " + std::to_string(data.size()) + " rows");
    } else {
        throw ArgumentError("surrogate: expected 'fit' or 'eval'");
    }
}

json cell_json(const hull::ResistanceCell& c) {
    return {{"froude", c.froude},   {"draft_fraction", c.draft_fraction}, {"speed", c.speed},  {"reynolds", c.reynolds},
            {"wetted_area", c.wetted_area}, {"wave", c.wave},             {"friction", c.friction}, {"total", c.total},
            {"cw", c.cw},           {"cf", c.cf},                         {"converged", c.converged}};
}

void cmd_hull(const RunConfig& cfg, const Command& cmd, RunLog& log) {
    if (!cmd.action.empty() && cmd.action != "eval") throw ArgumentError("hull: expected 'eval'");
    const hull::Environment env;
    if (!cmd.hull_params.empty()) {
        if (cmd.hull_params.size() != hull::kHullParams) throw ArgumentError("hull eval: --params needs 6 values");
        const auto dims = hull::scale_params(cmd.hull_params, cfg.hull.loa);
        const auto res = hull::aggregate_total_resistance(dims, env, cfg.hull.quadrature());
        json cells = json::array();
        for (const auto& c : res.cells) cells.push_back(cell_json(c));
        json j = {{"params", cmd.hull_params}, {"loa", cfg.hull.loa}, {"total", res.total}, {"converged", res.converged},
                  {"reward", hull_reward(cmd.hull_params, cfg.reward, cfg.hull)}, {"cells", cells}};
        write_json(out_path(cfg, "hull_eval.json"), j);
        std::cout << "total_resistance " << format_double(res.total) << '\n';
        log.line("hull eval: R_T sum " + format_double(res.total) + " N");
        return;
    }
    const Dataset data = load_training(cfg, cmd.data);
    if (data.dim() != hull::kHullParams) throw ParseError("hull eval: dataset must have 6 parameter columns");
    std::vector<double> totals(data.size());
    parallel_chunks(data.size(), 8, cfg.resolved_threads(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto q = hull::project_params(data.rows.row(i));
            totals[i] = hull::aggregate_total_resistance(hull::scale_params(q, cfg.hull.loa), env, cfg.hull.quadrature()).total;
        }
    });
    save_samples(out_path(cfg, "hull_eval.csv"), data.rows, totals);
    log.line("hull eval: " + std::to_string(data.size()) + " hulls");
}

void cmd_dataset(const RunConfig& cfg, const Command& cmd, RunLog& log) {
    const std::string path = cmd.data.empty() ? out_path(cfg, "dataset.csv") : cmd.data;
    Dataset ds;
    if (cmd.action == "synthetic") ds = make_synthetic_dataset(cfg.dataset.rows, cfg.dataset.dim, cfg.dataset.seed);
    else if (cmd.action == "hull") ds = make_hull_dataset(cfg.dataset.rows, cfg.dataset.seed, cfg.reward, cfg.hull, cfg.resolved_threads());
    else throw ArgumentError("dataset: expected 'synthetic' or 'hull'");
    save_samples(path, ds.rows, ds.rewards ? std::span<const double>(*ds.rewards) : std::span<const double>());
    log.line("dataset: wrote " + std::to_string(ds.size()) + " rows to " + path);
}

void cmd_run(const RunConfig& cfg, RunLog& log) {
    const Dataset data = load_training(cfg, "");
    save_samples(out_path(cfg, "dataset.csv"), data.rows,
                 data.rewards ? std::span<const double>(*data.rewards) : std::span<const double>());
    const auto reward = make_reward(cfg.reward, cfg.hull, data.dim());
    const auto training = rewards_of(*reward, data.rows, cfg.resolved_threads());

    const ModelFile pre = do_pretrain(cfg, data, log);

    // Unguided baseline: plain ancestral sampling from the pretrained model.
    const auto t0 = log.elapsed();
    const auto base_rows = ancestral_sample(pre.params, pre.schedule(), cfg.svdd.n_traj, cfg.svdd.seed, cfg.resolved_threads());
    const Matrix base = denormalize(from_rows(base_rows), pre.stats);
    const auto base_rewards = rewards_of(*reward, base, cfg.resolved_threads());
    save_samples(out_path(cfg, "samples_pretrained.csv"), base, base_rewards);
    log.line("sample: unguided baseline, " + std::to_string(base.rows) + " designs, " + fixed(log.elapsed() - t0) + " s");

    const auto ft = do_finetune(cfg, pre, *reward, &training, log);
    const auto guided = do_sample(cfg, ft.model, *reward, "samples.csv", log);

    json stats = eval_json(cfg, guided.rewards, training, "density.csv");
    stats["pretrained"] = eval_json(cfg, base_rewards, training, "density_pretrained.csv");
    stats["training"] = summary_json(summarize(training));
    stats["finetune"] = {{"alpha", ft.alpha},
                         {"anchor_divergence", ft.anchor_divergence},
                         {"first_mean_reward", ft.history.empty() ? 0.0 : ft.history.front().mean_reward},
                         {"last_mean_reward", ft.history.empty() ? 0.0 : ft.history.back().mean_reward}};
    write_json(out_path(cfg, "stats.json"), stats);
    log.line("run: guided fraction above training max " +
             fixed(stats["beyond_distribution"]["fraction_above_training_max"].get<double>()) + ", unguided " +
             fixed(stats["pretrained"]["beyond_distribution"]["fraction_above_training_max"].get<double>()));
}

}  // namespace

double hull_reward(std::span<const double> p, const RewardSpec& spec, const HullSpec& hs) {
    if (p.size() != hull::kHullParams) throw ArgumentError("hull reward: expected 6 parameters");
    const double violation = hull::param_violation(p);
    const auto q = hull::project_params(p);
    const auto res = hull::aggregate_total_resistance(hull::scale_params(q, hs.loa), hull::Environment{}, hs.quadrature());
    return ship_reward(res.total, spec.scale, spec.offset) - spec.range_weight * violation;
}

std::unique_ptr<RewardModel> make_reward(const RewardSpec& spec, const HullSpec& hs, std::size_t dim) {
    if (spec.kind == "synthetic") {
        if (spec.target.size() != dim) {
            throw ConfigError("reward.target: has " + std::to_string(spec.target.size()) + " values, designs have " +
                              std::to_string(dim));
        }
        return std::make_unique<SyntheticReward>(spec.target);
    }
    if (spec.kind == "hull") {
        if (dim != hull::kHullParams) throw ConfigError("reward.kind: hull reward needs 6-column designs");
        const double scale = spec.scale, offset = spec.offset, w = spec.range_weight;
        return std::make_unique<PenalizedReward>(
            "hull", dim,
            [scale, offset, hs](std::span<const double> p) {
                const auto q = hull::project_params(p);
                const auto res = hull::aggregate_total_resistance(hull::scale_params(q, hs.loa), hull::Environment{}, hs.quadrature());
                return ship_reward(res.total, scale, offset);
            },
            [w](std::span<const double> p) { return w * hull::param_violation(p); });
    }
    if (spec.kind == "surrogate" || spec.kind == "airfoil") {
        if (spec.surrogate.empty()) throw ConfigError("reward.surrogate: path required for kind " + spec.kind);
        auto model = std::make_shared<const TreeEnsemble>(load_trees(spec.surrogate));
        if (model->dim != dim) throw ConfigError("reward.surrogate: model dimension does not match the designs");
        const double scale = spec.scale, offset = spec.offset;
        auto r_hat = [model, scale, offset](std::span<const double> x) { return offset + scale * predict(*model, x); };
        if (spec.kind == "surrogate") return std::make_unique<PenalizedReward>("surrogate", dim, r_hat, nullptr);
        if (dim != kAirfoilDim) throw ConfigError("reward.kind: airfoil reward needs 384-column designs");
        const AirfoilPenaltyWeights w{spec.range_weight, spec.intersect_weight};
        return std::make_unique<PenalizedReward>("airfoil", dim, r_hat,
                                                 [w](std::span<const double> x) { return airfoil_feasibility_penalty(x, w); });
    }
    throw ConfigError("reward.kind: unknown kind " + spec.kind);
}

Dataset make_synthetic_dataset(std::size_t rows, std::size_t dim, std::uint64_t seed) {
    Dataset ds;
    ds.rows = Matrix(rows, dim);
    Rng rng(seed);
    rng.fill_normal(ds.rows.data);
    return ds;
}

Dataset make_hull_dataset(std::size_t rows, std::uint64_t seed, const RewardSpec& spec, const HullSpec& hs,
                          unsigned threads) {
    Dataset ds;
    ds.rows = Matrix(rows, hull::kHullParams);
    Rng rng(seed);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto p = hull::sample_params(rng);
        std::copy(p.begin(), p.end(), ds.rows.row(i).begin());
    }
    std::vector<double> r(rows);
    parallel_chunks(rows, 8, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) r[i] = hull_reward(ds.rows.row(i), spec, hs);
    });
    ds.rewards = std::move(r);
    return ds;
}

double auto_alpha(std::span<const double> rewards) {
    if (rewards.empty()) throw ArgumentError("auto_alpha: no rewards");
    const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
    const double spread = *hi - *lo;
    return spread > 0.0 && std::isfinite(spread) ? spread / 6.0 : 1.0;
}

RunLog::RunLog(const std::string& path) : out_(path, std::ios::app), start_(std::chrono::steady_clock::now()) {
    if (!out_) throw IoError("cannot write " + path);
}

void RunLog::line(const std::string& msg) {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    out_ << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << " +" << fixed(elapsed()) << "s " << msg << '\n';
    out_.flush();
    log::info(msg);
}

double RunLog::elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void execute(const RunConfig& cfg, const Command& cmd) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.output_dir + ": " + ec.message());
    write_text(out_path(cfg, "config.json"), serialize_config(cfg));
    RunLog log(out_path(cfg, "run.log"));
    log.line("command: " + cmd.name + (cmd.action.empty() ? "" : " " + cmd.action) + ", threads " +
             std::to_string(cfg.resolved_threads()));

    if (cmd.name == "pretrain") {
        do_pretrain(cfg, load_training(cfg, cmd.data), log);
    } else if (cmd.name == "finetune") {
        const ModelFile pre = load_model_or(cfg, cmd.model, "model_pretrained.rddm");
        const auto reward = make_reward(cfg.reward, cfg.hull, pre.params.arch.dim);
        std::vector<double> training;
        if (!cfg.finetune.alpha) training = rewards_of(*reward, load_training(cfg, cmd.data).rows, cfg.resolved_threads());
        do_finetune(cfg, pre, *reward, cfg.finetune.alpha ? nullptr : &training, log);
    } else if (cmd.name == "sample") {
        const ModelFile model = load_model_or(cfg, cmd.model, "model_finetuned.rddm");
        const auto reward = make_reward(cfg.reward, cfg.hull, model.params.arch.dim);
        do_sample(cfg, model, *reward, cmd.samples.empty() ? "samples.csv" : cmd.samples, log);
    } else if (cmd.name == "eval") {
        std::unique_ptr<RewardModel> reward;
        const std::string path = cmd.samples.empty() ? out_path(cfg, "samples.csv") : cmd.samples;
        if (fs::exists(path)) {
            std::ifstream in(path);
            std::string header;
            std::getline(in, header);
            const std::size_t cols = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
            const bool has_reward = header.size() >= 6 && header.rfind("reward") == header.size() - 6;
            reward = make_reward(cfg.reward, cfg.hull, has_reward ? cols - 1 : cols);
        }
        cmd_eval(cfg, cmd, reward.get(), log);
    } else if (cmd.name == "surrogate") {
        cmd_surrogate(cfg, cmd, log);
    } else if (cmd.name == "hull") {
        cmd_hull(cfg, cmd, log);
    } else if (cmd.name == "dataset") {
        cmd_dataset(cfg, cmd, log);
    } else if (cmd.name == "run") {
        cmd_run(cfg, log);
    } else {
        throw ArgumentError("unknown command '" + cmd.name + "'");
    }
    log.line("done in " + fixed(log.elapsed()) + " s");
}

int run_pipeline(const RunConfig& cfg, const Command& cmd) {
    try {
        execute(cfg, cmd);
        return 0;
    } catch (const Error& e) {
        const auto code = e.code();
        const char* kind = code == ExitCode::usage ? "usage" : code == ExitCode::data ? "data" : "numerical";
        std::cerr << "error[" << kind << "]: " << e.what() << '\n';
        return static_cast<int>(code);
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << '\n';
        return static_cast<int>(ExitCode::numerical);
    }
}

}  // namespace rdd
