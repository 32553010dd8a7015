#include "rdd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "rdd/binary.hpp"
#include "rdd/error.hpp"

namespace rdd {

namespace {

constexpr std::uint32_t kModelFormatVersion = 1;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
    throw ParseError(source + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

Dataset parse_dataset(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(source + ": empty file");
    ++line_no;
    const auto header = split_commas(line);
    std::size_t dim = header.size();
    bool has_reward = false;
    if (!header.empty() && header.back() == "reward") {
        has_reward = true;
        --dim;
    }
    if (dim == 0) fail(source, line_no, "header has no design columns");
    for (std::size_t j = 0; j < dim; ++j) {
        if (header[j] != "x" + std::to_string(j)) {
            fail(source, line_no, "expected column 'x" + std::to_string(j) + "', found '" + std::string(header[j]) + "'");
        }
    }

    Dataset ds;
    std::vector<double> values;
    std::vector<double> rewards;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != header.size()) {
            fail(source, line_no, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double v = 0.0;
            const auto cell = cells[j];
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
                fail(source, line_no, "column " + std::to_string(j + 1) + ": not a finite number: '" + std::string(cell) + "'");
            }
            (j < dim ? values : rewards).push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw ParseError(source + ": no data rows");
    ds.rows = Matrix(rows, dim);
    ds.rows.data = std::move(values);
    if (has_reward) ds.rewards = std::move(rewards);
    return ds;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset " + path);
    return parse_dataset(in, path);
}

void write_samples(std::ostream& out, const Matrix& designs, std::span<const double> rewards) {
    if (!rewards.empty() && rewards.size() != designs.rows) throw ArgumentError("write_samples: one reward per row required");
    for (std::size_t j = 0; j < designs.cols; ++j) out << (j ? "," : "") << 'x' << j;
    if (!rewards.empty()) out << ",reward";
    out << '\n';
    for (std::size_t i = 0; i < designs.rows; ++i) {
        for (std::size_t j = 0; j < designs.cols; ++j) out << (j ? "," : "") << format_double(designs(i, j));
        if (!rewards.empty()) out << ',' << format_double(rewards[i]);
        out << '\n';
    }
}

void save_samples(const std::string& path, const Matrix& designs, std::span<const double> rewards) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_samples(out, designs, rewards);
    if (!out) throw IoError("failed writing " + path);
}

void write_model(std::ostream& out, const ModelFile& m) {
    using namespace binary;
    const DenoiserArch& a = m.params.arch;
    put_magic(out, "RDDM");
    put_u32(out, kModelFormatVersion);
    put_u64(out, a.dim);
    put_u64(out, a.embed_dim);
    put_u64(out, static_cast<std::uint64_t>(a.steps));
    put_u32(out, static_cast<std::uint32_t>(a.activation));
    put_u64(out, a.hidden.size());
    for (std::size_t h : a.hidden) put_u64(out, h);
    put_u64(out, m.params.values.size());
    for (double v : m.params.values) put_f64(out, v);
    put_u64(out, m.betas.size());
    for (double b : m.betas) put_f64(out, b);
    put_u64(out, m.stats.mean.size());
    for (double v : m.stats.mean) put_f64(out, v);
    for (double v : m.stats.std) put_f64(out, v);
}

ModelFile read_model(std::istream& in) {
    using namespace binary;
    expect_magic(in, "RDDM");
    const std::uint32_t version = get_u32(in, "version");
    if (version != kModelFormatVersion) throw ParseError("unsupported RDDM version " + std::to_string(version));
    ModelFile m;
    DenoiserArch& a = m.params.arch;
    a.dim = get_u64(in, "architecture");
    a.embed_dim = get_u64(in, "architecture");
    a.steps = static_cast<int>(get_u64(in, "architecture"));
    const std::uint32_t act = get_u32(in, "architecture");
    if (act != static_cast<std::uint32_t>(Activation::silu)) throw ParseError("RDDM: unknown activation " + std::to_string(act));
    a.activation = Activation::silu;
    const std::uint64_t layers = get_u64(in, "architecture");
    if (layers > 64) throw ParseError("RDDM: implausible hidden layer count");
    a.hidden.resize(layers);
    for (auto& h : a.hidden) h = get_u64(in, "architecture");
    try {
        a.validate();
    } catch (const Error& e) {
        throw ParseError(std::string("RDDM: invalid architecture: ") + e.what());
    }
    const std::uint64_t count = get_u64(in, "parameter count");
    if (count != a.parameter_count()) throw ParseError("RDDM: parameter count does not match architecture");
    m.params.values.resize(count);
    for (double& v : m.params.values) v = get_f64(in, "parameters");
    const std::uint64_t steps = get_u64(in, "schedule");
    if (steps != static_cast<std::uint64_t>(a.steps)) throw ParseError("RDDM: schedule length does not match architecture");
    m.betas.resize(steps);
    for (double& b : m.betas) b = get_f64(in, "schedule");
    const std::uint64_t d = get_u64(in, "normalisation");
    if (d != a.dim) throw ParseError("RDDM: normalisation width does not match architecture");
    m.stats.mean.resize(d);
    m.stats.std.resize(d);
    for (double& v : m.stats.mean) v = get_f64(in, "normalisation");
    for (double& v : m.stats.std) v = get_f64(in, "normalisation");
    return m;
}

void save_model(const std::string& path, const ModelFile& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_model(out, model);
    if (!out) throw IoError("failed writing " + path);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model " + path);
    return read_model(in);
}

std::vector<double> schedule_betas(const NoiseSchedule& sched) {
    std::vector<double> b(static_cast<std::size_t>(sched.steps()));
    for (int t = 1; t <= sched.steps(); ++t) b[static_cast<std::size_t>(t - 1)] = sched.beta(t);
    return b;
}

}  // namespace rdd
