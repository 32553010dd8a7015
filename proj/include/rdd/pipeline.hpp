#pragma once

#include <chrono>
#include <cstddef>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdd/config.hpp"
#include "rdd/io.hpp"
#include "rdd/pretrain.hpp"
#include "rdd/rewards.hpp"

namespace rdd {

// Hull reward on a raw 6-parameter vector: offset - scale * R_T of the
// projected hull, minus range_weight times the constraint violation.
double hull_reward(std::span<const double> p, const RewardSpec& spec, const HullSpec& hull);

// Reward back-end selected by spec.kind for designs of width dim.
std::unique_ptr<RewardModel> make_reward(const RewardSpec& spec, const HullSpec& hull, std::size_t dim);

// rows ~ N(0, I_dim), no reward column.
Dataset make_synthetic_dataset(std::size_t rows, std::size_t dim, std::uint64_t seed);
// Hull parameter vectors drawn from the default box, labelled with hull_reward.
Dataset make_hull_dataset(std::size_t rows, std::uint64_t seed, const RewardSpec& spec, const HullSpec& hull,
                          unsigned threads = 1);

// Temperature mapping the reward spread of `rewards` onto exponents within
// +-3: (max - min) / 6, or 1 for a constant list.
double auto_alpha(std::span<const double> rewards);

// Appends timestamped lines to <output_dir>/run.log and mirrors them to the
// process log.
class RunLog {
public:
    explicit RunLog(const std::string& path);
    void line(const std::string& msg);
    // Seconds since construction.
    double elapsed() const;

private:
    std::ofstream out_;
    std::chrono::steady_clock::time_point start_;
};

// What the CLI asked for. Paths left empty fall back to the config or to
// the default file names inside output_dir.
struct Command {
    std::string name;  // pretrain | finetune | sample | eval | surrogate | hull | dataset | run
    std::string action;  // surrogate: fit | eval; dataset: synthetic | hull
    std::string model;
    std::string data;
    std::string samples;
    std::string training;
    std::string surrogate;
    std::vector<double> hull_params;
};

// Executes one command and writes its outputs plus the archived config
// (config.json) and run.log into cfg.output_dir.
void execute(const RunConfig& cfg, const Command& cmd);

// execute() with errors mapped to exit codes (0 ok, 1 usage, 2 data,
// 3 numerical); the message goes to stderr as "error[<kind>]: ...".
int run_pipeline(const RunConfig& cfg, const Command& cmd);

}  // namespace rdd
