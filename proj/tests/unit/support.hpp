#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "rdd/denoiser.hpp"
#include "rdd/log.hpp"
#include "rdd/rewards.hpp"

namespace test {

inline rdd::DenoiserArch small_arch(std::size_t dim, std::vector<std::size_t> hidden = {16, 16}, int steps = 10,
                                    std::size_t embed = 8) {
    rdd::DenoiserArch a;
    a.dim = dim;
    a.hidden = std::move(hidden);
    a.steps = steps;
    a.embed_dim = embed;
    return a;
}

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// One-sided Welch z statistic for mean(a) > mean(b).
inline double welch_z(const std::vector<double>& a, const std::vector<double>& b) {
    return (mean(a) - mean(b)) / std::sqrt(variance(a) / static_cast<double>(a.size()) + variance(b) / static_cast<double>(b.size()));
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("rdd_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Collects log messages while alive.
class LogCapture {
public:
    LogCapture() {
        rdd::log::set_sink([this](rdd::log::Level l, const std::string& m) {
            std::lock_guard lock(mu_);
            if (l >= rdd::log::Level::warn) warnings_.push_back(m);
        });
    }
    ~LogCapture() { rdd::log::reset_sink(); }
    std::vector<std::string> warnings() const {
        std::lock_guard lock(mu_);
        return warnings_;
    }

private:
    mutable std::mutex mu_;
    std::vector<std::string> warnings_;
};

// Reward that counts evaluate() calls; the only entry point a RewardModel has.
class CountingReward final : public rdd::RewardModel {
public:
    explicit CountingReward(const rdd::RewardModel& inner) : inner_(inner) {}
    std::size_t dim() const override { return inner_.dim(); }
    double evaluate(std::span<const double> x) const override {
        ++calls_;
        return inner_.evaluate(x);
    }
    std::string name() const override { return "counting"; }
    std::size_t calls() const { return calls_; }

private:
    const rdd::RewardModel& inner_;
    mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace test
