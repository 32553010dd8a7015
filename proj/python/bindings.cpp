#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "rdd/config.hpp"
#include "rdd/error.hpp"
#include "rdd/hull.hpp"
#include "rdd/io.hpp"
#include "rdd/metrics.hpp"
#include "rdd/pipeline.hpp"
#include "rdd/pretrain.hpp"
#include "rdd/rewards.hpp"
#include "rdd/schedule.hpp"
#include "rdd/surrogate.hpp"
#include "rdd/svdd.hpp"

namespace py = pybind11;
using namespace rdd;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw ArgumentError("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data.begin());
    return m;
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

Array to_array(const Matrix& m) {
    Array out({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

Array to_array(const std::vector<double>& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

// Samples in physical units from a saved model; M = 1 is ancestral sampling.
py::tuple sample_model(const std::string& path, const std::string& config_json, std::size_t n, std::size_t candidates,
                       double alpha, std::uint64_t seed) {
    const ModelFile model = load_model(path);
    const RunConfig cfg = parse_config_text(config_json);
    const auto reward = make_reward(cfg.reward, cfg.hull, model.params.arch.dim);
    SvddConfig sc = make_svdd_config(cfg);
    sc.candidates = candidates;
    sc.alpha = alpha;
    sc.n_traj = n;
    sc.seed = seed;
    std::vector<Trajectory> traj;
    {
        py::gil_scoped_release release;
        traj = svdd_generate(model.params, model.schedule(), sc, *reward, model.stats);
    }
    Matrix x(n, model.params.arch.dim);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto phys = denormalize(traj[i].x0, model.stats);
        std::copy(phys.begin(), phys.end(), x.row(i).begin());
        r[i] = traj[i].reward;
    }
    return py::make_tuple(to_array(x), to_array(r));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Reward-directed diffusion sampling and design-evaluation kernels";

    py::register_exception<Error>(m, "RddError", PyExc_RuntimeError);

    py::class_<NoiseSchedule>(m, "NoiseSchedule")
        .def(py::init([](int steps, double beta_start, double beta_end) {
                 return NoiseSchedule::make(steps, beta_start, beta_end);
             }),
             py::arg("steps") = 100, py::arg("beta_start") = 1e-4, py::arg("beta_end") = 0.02)
        .def_property_readonly("steps", &NoiseSchedule::steps)
        .def("beta", &NoiseSchedule::beta)
        .def("alpha_bar", &NoiseSchedule::alpha_bar)
        .def("sigma", &NoiseSchedule::sigma);

    m.def("forward_marginal", [](const Array& x0, int t, const Array& eps, const NoiseSchedule& s) {
        return to_array(forward_marginal(to_vector(x0), t, to_vector(eps), s));
    });

    m.def("soft_weight", &soft_weight, py::arg("reward"), py::arg("alpha"));
    m.def("synthetic_reward", [](const Array& x, const Array& target) {
        return synthetic_benchmark_reward(to_vector(x), to_vector(target));
    });
    m.def("self_intersections", [](const Array& pts) {
        const Matrix p = to_matrix(pts);
        if (p.cols != 2) throw ArgumentError("expected an (n, 2) array");
        return check_self_intersection(to_points(p.data));
    });

    m.def("friction_coefficient", &hull::friction_coefficient, py::arg("reynolds"));
    m.def(
        "hull_resistance",
        [](const Array& params, double loa) {
            const auto res = hull::aggregate_total_resistance(hull::scale_params(to_vector(params), loa));
            py::list cells;
            for (const auto& c : res.cells) {
                py::dict d;
                d["froude"] = c.froude;
                d["draft_fraction"] = c.draft_fraction;
                d["wave"] = c.wave;
                d["friction"] = c.friction;
                d["total"] = c.total;
                d["cw"] = c.cw;
                d["cf"] = c.cf;
                cells.append(d);
            }
            py::dict out;
            out["total"] = res.total;
            out["converged"] = res.converged;
            out["cells"] = cells;
            return out;
        },
        py::arg("params"), py::arg("loa") = 100.0);

    m.def("boxplot_stats", [](const Array& v) {
        const auto b = boxplot_stats(to_vector(v));
        py::dict d;
        d["median"] = b.median;
        d["q1"] = b.q1;
        d["q3"] = b.q3;
        d["iqr"] = b.iqr;
        d["lower_whisker"] = b.lower_whisker;
        d["upper_whisker"] = b.upper_whisker;
        d["outliers"] = b.outliers;
        return d;
    });
    m.def("silverman_bandwidth", [](const Array& v) { return silverman_bandwidth(to_vector(v)); });
    m.def("beyond_distribution", [](const Array& samples, const Array& training) {
        const auto b = beyond_distribution(to_vector(samples), to_vector(training));
        py::dict d;
        d["fraction_above_max"] = b.fraction_above_max;
        d["mean_shift"] = b.mean_shift;
        d["relative_improvement"] = b.relative_improvement;
        d["training_max"] = b.training_max;
        return d;
    });

    py::class_<TreeEnsemble>(m, "TreeEnsemble")
        .def_property_readonly("n_trees", &TreeEnsemble::n_trees)
        .def_readonly("dim", &TreeEnsemble::dim)
        .def("predict", [](const TreeEnsemble& t, const Array& x) { return to_array(predict(t, to_matrix(x))); })
        .def("save", [](const TreeEnsemble& t, const std::string& path) { save_trees(path, t); });
    m.def(
        "fit_trees",
        [](const Array& x, const Array& y, std::size_t n_trees, std::size_t max_depth, double shrinkage) {
            BoostConfig cfg;
            cfg.n_trees = n_trees;
            cfg.max_depth = max_depth;
            cfg.shrinkage = shrinkage;
            const Matrix xm = to_matrix(x);
            const auto yv = to_vector(y);
            py::gil_scoped_release release;
            return fit_boosted_trees(xm, yv, cfg).model;
        },
        py::arg("x"), py::arg("y"), py::arg("n_trees") = 200, py::arg("max_depth") = 4, py::arg("shrinkage") = 0.1);
    m.def("load_trees", &load_trees);
    m.def("r2_score", [](const Array& p, const Array& y) { return r2_score(to_vector(p), to_vector(y)); });

    m.def("default_config", [] { return serialize_config(RunConfig{}); });
    m.def(
        "run",
        [](const std::string& command, const std::string& config_json, const std::string& action) {
            const RunConfig cfg = parse_config_text(config_json);
            Command cmd;
            cmd.name = command;
            cmd.action = action;
            py::gil_scoped_release release;
            return run_pipeline(cfg, cmd);
        },
        py::arg("command"), py::arg("config_json") = "{}", py::arg("action") = "");
    m.def("sample", &sample_model, py::arg("model_path"), py::arg("config_json") = "{}", py::arg("n") = 100,
          py::arg("candidates") = 10, py::arg("alpha") = 1.0, py::arg("seed") = 0);
}
