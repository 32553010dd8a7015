#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rdd/denoiser.hpp"
#include "rdd/pretrain.hpp"
#include "rdd/schedule.hpp"
#include "rdd/tensor.hpp"

namespace rdd {

// Shortest decimal form with 17 significant digits; parses back exactly.
std::string format_double(double v);

// CSV with a header row x0,...,x{d-1}[,reward] and one design per row.
// Ragged rows, non-numeric or non-finite cells and bad headers raise
// ParseError naming the source and line number.
Dataset parse_dataset(std::istream& in, const std::string& source = "<stream>");
Dataset load_dataset(const std::string& path);

// Writes the same format; `rewards` may be empty (no reward column).
void write_samples(std::ostream& out, const Matrix& designs, std::span<const double> rewards = {});
void save_samples(const std::string& path, const Matrix& designs, std::span<const double> rewards = {});

// Everything needed to sample from a trained model: network, the schedule it
// was trained with, and the per-column normalisation of its training data.
struct ModelFile {
    DenoiserParams params;
    std::vector<double> betas;  // beta_1..beta_T
    NormStats stats;
    NoiseSchedule schedule() const { return NoiseSchedule::from_betas(betas); }
    bool operator==(const ModelFile&) const = default;
};

// "RDDM" binary format, little-endian.
void write_model(std::ostream& out, const ModelFile& model);
ModelFile read_model(std::istream& in);
void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

std::vector<double> schedule_betas(const NoiseSchedule& sched);

}  // namespace rdd
