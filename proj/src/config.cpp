#include "rdd/config.hpp"

#include <cmath>
#include <concepts>
#include <limits>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "rdd/error.hpp"
#include "rdd/parallel.hpp"

namespace rdd {

namespace {

using json = nlohmann::ordered_json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void bad(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) bad(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) bad(join(path, key), "unknown key");
    }
}

void read(const json& v, const std::string& path, double& out) {
    if (!v.is_number()) bad(path, "expected a number");
    out = v.get<double>();
}
void read(const json& v, const std::string& path, bool& out) {
    if (!v.is_boolean()) bad(path, "expected true or false");
    out = v.get<bool>();
}
void read(const json& v, const std::string& path, std::string& out) {
    if (!v.is_string()) bad(path, "expected a string");
    out = v.get<std::string>();
}
void read(const json& v, const std::string& path, int& out) {
    if (!v.is_number_integer()) bad(path, "expected an integer");
    const auto i = v.get<std::int64_t>();
    if (i < -2147483647 || i > 2147483647) bad(path, "integer out of range");
    out = static_cast<int>(i);
}
template <std::unsigned_integral T>
void read(const json& v, const std::string& path, T& out) {
    if (!v.is_number_unsigned()) bad(path, "expected a non-negative integer");
    const auto u = v.get<std::uint64_t>();
    if (u > std::numeric_limits<T>::max()) bad(path, "value too large");
    out = static_cast<T>(u);
}
template <class T>
void read(const json& v, const std::string& path, std::vector<T>& out) {
    if (!v.is_array()) bad(path, "expected an array");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
        T item{};
        read(v[i], path + "[" + std::to_string(i) + "]", item);
        out.push_back(item);
    }
}

template <class T>
void field(const json& obj, const std::string& path, const char* key, T& out) {
    if (obj.contains(key)) read(obj.at(key), join(path, key), out);
}

void parse_section(const json& j, const std::string& p, ScheduleSpec& s) {
    check_keys(j, p, {"T", "beta_start", "beta_end"});
    field(j, p, "T", s.steps);
    field(j, p, "beta_start", s.beta_start);
    field(j, p, "beta_end", s.beta_end);
}

void parse_section(const json& j, const std::string& p, ModelSpec& s) {
    check_keys(j, p, {"embed_dim", "hidden"});
    field(j, p, "embed_dim", s.embed_dim);
    field(j, p, "hidden", s.hidden);
}

void parse_section(const json& j, const std::string& p, PretrainSpec& s) {
    check_keys(j, p, {"epochs", "batch_size", "learning_rate", "seed"});
    field(j, p, "epochs", s.epochs);
    field(j, p, "batch_size", s.batch_size);
    field(j, p, "learning_rate", s.learning_rate);
    field(j, p, "seed", s.seed);
}

void parse_section(const json& j, const std::string& p, FinetuneSpec& s) {
    check_keys(j, p, {"S", "m", "alpha", "learning_rate", "anchor", "anchor_kappa", "anchor_bound", "inner_epochs",
                      "batch_size", "seed"});
    field(j, p, "S", s.iterations);
    field(j, p, "m", s.samples);
    if (j.contains("alpha")) {
        const auto& a = j.at("alpha");
        if (a.is_string() && a.get<std::string>() == "auto") {
            s.alpha.reset();
        } else {
            double v = 0.0;
            if (!a.is_number()) bad(join(p, "alpha"), "expected a number or \"auto\"");
            read(a, join(p, "alpha"), v);
            s.alpha = v;
        }
    }
    field(j, p, "learning_rate", s.learning_rate);
    field(j, p, "anchor", s.anchor);
    field(j, p, "anchor_kappa", s.anchor_kappa);
    field(j, p, "anchor_bound", s.anchor_bound);
    field(j, p, "inner_epochs", s.inner_epochs);
    field(j, p, "batch_size", s.batch_size);
    field(j, p, "seed", s.seed);
}

void parse_section(const json& j, const std::string& p, SvddSpec& s) {
    check_keys(j, p, {"M", "alpha", "n_traj", "seed", "greedy_threshold", "chunk"});
    field(j, p, "M", s.candidates);
    field(j, p, "alpha", s.alpha);
    field(j, p, "n_traj", s.n_traj);
    field(j, p, "seed", s.seed);
    field(j, p, "greedy_threshold", s.greedy_threshold);
    field(j, p, "chunk", s.chunk);
}

void parse_section(const json& j, const std::string& p, RewardSpec& s) {
    check_keys(j, p, {"kind", "target", "scale", "offset", "range_weight", "intersect_weight", "surrogate"});
    field(j, p, "kind", s.kind);
    field(j, p, "target", s.target);
    field(j, p, "scale", s.scale);
    field(j, p, "offset", s.offset);
    field(j, p, "range_weight", s.range_weight);
    field(j, p, "intersect_weight", s.intersect_weight);
    field(j, p, "surrogate", s.surrogate);
}

void parse_section(const json& j, const std::string& p, SurrogateSpec& s) {
    check_keys(j, p, {"n_trees", "max_depth", "shrinkage", "thresholds", "test_fraction", "seed"});
    field(j, p, "n_trees", s.n_trees);
    field(j, p, "max_depth", s.max_depth);
    field(j, p, "shrinkage", s.shrinkage);
    field(j, p, "thresholds", s.thresholds);
    field(j, p, "test_fraction", s.test_fraction);
    field(j, p, "seed", s.seed);
}

void parse_section(const json& j, const std::string& p, HullSpec& s) {
    check_keys(j, p, {"loa", "x_nodes", "z_nodes", "lambda_nodes", "u_max"});
    field(j, p, "loa", s.loa);
    field(j, p, "x_nodes", s.x_nodes);
    field(j, p, "z_nodes", s.z_nodes);
    field(j, p, "lambda_nodes", s.lambda_nodes);
    field(j, p, "u_max", s.u_max);
}

void parse_section(const json& j, const std::string& p, DatasetSpec& s) {
    check_keys(j, p, {"source", "path", "rows", "dim", "seed"});
    field(j, p, "source", s.source);
    field(j, p, "path", s.path);
    field(j, p, "rows", s.rows);
    field(j, p, "dim", s.dim);
    field(j, p, "seed", s.seed);
}

void parse_section(const json& j, const std::string& p, EvalSpec& s) {
    check_keys(j, p, {"kde_points"});
    field(j, p, "kde_points", s.kde_points);
}

template <class S>
void section(const json& root, const char* key, S& s) {
    if (root.contains(key)) parse_section(root.at(key), key, s);
}

void require(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) bad(path, msg);
}

}  // namespace

void RunConfig::validate() const {
    require(schedule.steps >= 1, "schedule.T", "must be >= 1");
    require(schedule.beta_start > 0.0 && schedule.beta_start < 1.0, "schedule.beta_start", "must lie in (0, 1)");
    require(schedule.beta_end > 0.0 && schedule.beta_end < 1.0, "schedule.beta_end", "must lie in (0, 1)");
    require(model.embed_dim >= 2 && model.embed_dim % 2 == 0, "model.embed_dim", "must be an even number >= 2");
    require(!model.hidden.empty(), "model.hidden", "needs at least one hidden layer");
    for (std::size_t i = 0; i < model.hidden.size(); ++i) {
        require(model.hidden[i] >= 1, "model.hidden[" + std::to_string(i) + "]", "must be >= 1");
    }
    require(pretrain.epochs >= 0, "pretrain.epochs", "must be >= 0");
    require(pretrain.batch_size >= 1, "pretrain.batch_size", "must be >= 1");
    require(pretrain.learning_rate > 0.0, "pretrain.learning_rate", "must be > 0");
    require(finetune.iterations >= 0, "finetune.S", "must be >= 0");
    require(finetune.samples >= 2, "finetune.m", "must be >= 2");
    require(!finetune.alpha || *finetune.alpha > 0.0, "finetune.alpha", "must be > 0 or \"auto\"");
    require(finetune.learning_rate > 0.0, "finetune.learning_rate", "must be > 0");
    require(finetune.anchor_kappa >= 0.0, "finetune.anchor_kappa", "must be >= 0");
    require(finetune.anchor_bound > 0.0, "finetune.anchor_bound", "must be > 0");
    require(finetune.inner_epochs >= 1, "finetune.inner_epochs", "must be >= 1");
    require(finetune.batch_size >= 1, "finetune.batch_size", "must be >= 1");
    require(svdd.candidates >= 1, "svdd.M", "must be >= 1");
    require(svdd.alpha >= 0.0, "svdd.alpha", "must be >= 0");
    require(svdd.n_traj >= 1, "svdd.n_traj", "must be >= 1");
    require(svdd.greedy_threshold >= 0.0, "svdd.greedy_threshold", "must be >= 0");
    require(svdd.chunk >= 1, "svdd.chunk", "must be >= 1");
    require(reward.kind == "synthetic" || reward.kind == "hull" || reward.kind == "surrogate" || reward.kind == "airfoil",
            "reward.kind", "must be one of synthetic, hull, surrogate, airfoil");
    require(!(reward.kind == "synthetic" && reward.target.empty()), "reward.target", "must be non-empty");
    require(std::isfinite(reward.scale) && std::isfinite(reward.offset), "reward.scale", "scale and offset must be finite");
    require(reward.kind != "hull" || reward.scale > 0.0, "reward.scale", "must be > 0 for the hull reward");
    require(reward.range_weight >= 0.0, "reward.range_weight", "must be >= 0");
    require(reward.intersect_weight >= 0.0, "reward.intersect_weight", "must be >= 0");
    require(surrogate.n_trees >= 1, "surrogate.n_trees", "must be >= 1");
    require(surrogate.shrinkage > 0.0 && surrogate.shrinkage <= 1.0, "surrogate.shrinkage", "must lie in (0, 1]");
    require(surrogate.thresholds >= 1 && surrogate.thresholds <= 65534, "surrogate.thresholds", "must lie in [1, 65534]");
    require(surrogate.test_fraction > 0.0 && surrogate.test_fraction < 1.0, "surrogate.test_fraction", "must lie in (0, 1)");
    require(hull.loa > 0.0, "hull.loa", "must be > 0");
    require(hull.x_nodes >= 4, "hull.x_nodes", "must be >= 4");
    require(hull.z_nodes >= 2, "hull.z_nodes", "must be >= 2");
    require(hull.lambda_nodes >= 4, "hull.lambda_nodes", "must be >= 4");
    require(hull.u_max > 0.0, "hull.u_max", "must be > 0");
    require(dataset.source == "synthetic" || dataset.source == "hull" || dataset.source == "file", "dataset.source",
            "must be one of synthetic, hull, file");
    require(dataset.source != "file" || !dataset.path.empty(), "dataset.path", "required when dataset.source is \"file\"");
    require(dataset.rows >= 10, "dataset.rows", "must be >= 10");
    require(dataset.dim >= 1, "dataset.dim", "must be >= 1");
    require(eval.kde_points >= 2, "eval.kde_points", "must be >= 2");
    require(!output_dir.empty(), "output_dir", "must be non-empty");
}

unsigned RunConfig::resolved_threads() const { return threads > 0 ? threads : default_threads(); }

std::string serialize_config(const RunConfig& c) {
    json j;
    j["schedule"] = {{"T", c.schedule.steps}, {"beta_start", c.schedule.beta_start}, {"beta_end", c.schedule.beta_end}};
    j["model"] = {{"embed_dim", c.model.embed_dim}, {"hidden", c.model.hidden}};
    j["pretrain"] = {{"epochs", c.pretrain.epochs},
                     {"batch_size", c.pretrain.batch_size},
                     {"learning_rate", c.pretrain.learning_rate},
                     {"seed", c.pretrain.seed}};
    json ft;
    ft["S"] = c.finetune.iterations;
    ft["m"] = c.finetune.samples;
    if (c.finetune.alpha) ft["alpha"] = *c.finetune.alpha;
    else ft["alpha"] = "auto";
    ft["learning_rate"] = c.finetune.learning_rate;
    ft["anchor"] = c.finetune.anchor;
    ft["anchor_kappa"] = c.finetune.anchor_kappa;
    ft["anchor_bound"] = c.finetune.anchor_bound;
    ft["inner_epochs"] = c.finetune.inner_epochs;
    ft["batch_size"] = c.finetune.batch_size;
    ft["seed"] = c.finetune.seed;
    j["finetune"] = ft;
    j["svdd"] = {{"M", c.svdd.candidates},     {"alpha", c.svdd.alpha},
                 {"n_traj", c.svdd.n_traj},    {"seed", c.svdd.seed},
                 {"greedy_threshold", c.svdd.greedy_threshold}, {"chunk", c.svdd.chunk}};
    j["reward"] = {{"kind", c.reward.kind},
                   {"target", c.reward.target},
                   {"scale", c.reward.scale},
                   {"offset", c.reward.offset},
                   {"range_weight", c.reward.range_weight},
                   {"intersect_weight", c.reward.intersect_weight},
                   {"surrogate", c.reward.surrogate}};
    j["surrogate"] = {{"n_trees", c.surrogate.n_trees},       {"max_depth", c.surrogate.max_depth},
                      {"shrinkage", c.surrogate.shrinkage},   {"thresholds", c.surrogate.thresholds},
                      {"test_fraction", c.surrogate.test_fraction}, {"seed", c.surrogate.seed}};
    j["hull"] = {{"loa", c.hull.loa},
                 {"x_nodes", c.hull.x_nodes},
                 {"z_nodes", c.hull.z_nodes},
                 {"lambda_nodes", c.hull.lambda_nodes},
                 {"u_max", c.hull.u_max}};
    j["dataset"] = {{"source", c.dataset.source},
                    {"path", c.dataset.path},
                    {"rows", c.dataset.rows},
                    {"dim", c.dataset.dim},
                    {"seed", c.dataset.seed}};
    j["eval"] = {{"kde_points", c.eval.kde_points}};
    j["output_dir"] = c.output_dir;
    j["threads"] = c.threads;
    return j.dump(2) + "\n";
}

RunConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    check_keys(root, "", {"schedule", "model", "pretrain", "finetune", "svdd", "reward", "surrogate", "hull", "dataset",
                          "eval", "output_dir", "threads"});
    RunConfig cfg;
    section(root, "schedule", cfg.schedule);
    section(root, "model", cfg.model);
    section(root, "pretrain", cfg.pretrain);
    section(root, "finetune", cfg.finetune);
    section(root, "svdd", cfg.svdd);
    section(root, "reward", cfg.reward);
    section(root, "surrogate", cfg.surrogate);
    section(root, "hull", cfg.hull);
    section(root, "dataset", cfg.dataset);
    section(root, "eval", cfg.eval);
    field(root, "", "output_dir", cfg.output_dir);
    field(root, "", "threads", cfg.threads);
    if (cfg.threads > 4096) bad("threads", "value too large");
    cfg.validate();
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

DenoiserArch make_arch(const RunConfig& cfg, std::size_t dim) {
    DenoiserArch a;
    a.dim = dim;
    a.embed_dim = cfg.model.embed_dim;
    a.hidden = cfg.model.hidden;
    a.steps = cfg.schedule.steps;
    a.validate();
    return a;
}

FinetuneConfig make_finetune_config(const RunConfig& cfg, double alpha) {
    FinetuneConfig f;
    f.iterations = cfg.finetune.iterations;
    f.samples = cfg.finetune.samples;
    f.alpha = alpha;
    f.learning_rate = cfg.finetune.learning_rate;
    f.anchor = cfg.finetune.anchor;
    f.anchor_kappa = cfg.finetune.anchor_kappa;
    f.anchor_bound = cfg.finetune.anchor_bound;
    f.inner_epochs = cfg.finetune.inner_epochs;
    f.batch_size = cfg.finetune.batch_size;
    f.seed = cfg.finetune.seed;
    f.threads = cfg.resolved_threads();
    return f;
}

SvddConfig make_svdd_config(const RunConfig& cfg) {
    SvddConfig s;
    s.candidates = cfg.svdd.candidates;
    s.alpha = cfg.svdd.alpha;
    s.n_traj = cfg.svdd.n_traj;
    s.seed = cfg.svdd.seed;
    s.greedy_threshold = cfg.svdd.greedy_threshold;
    s.chunk = cfg.svdd.chunk;
    s.threads = cfg.resolved_threads();
    return s;
}

BoostConfig make_boost_config(const RunConfig& cfg) {
    return {cfg.surrogate.n_trees, cfg.surrogate.max_depth, cfg.surrogate.shrinkage, cfg.surrogate.thresholds};
}

}  // namespace rdd
