#include "vcei/dataset.hpp"
#include "vcei/identifier.hpp"
#include "vcei/kernel.hpp"
#include "vcei/mmd.hpp"
#include "vcei/regressor.hpp"
#include "vcei/variation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace vcei;

namespace {

DataPair make_pair(const Matrix& x, const Matrix& y, std::optional<std::string> label, std::string name) {
    DataPair p;
    p.xs = x;
    p.ys = y;
    if (label) p.label = parse_direction(*label);
    p.name = std::move(name);
    p.validate();
    return p;
}

py::dict pair_dict(const DataPair& p) {
    py::dict d;
    d["x"] = p.xs;
    d["y"] = p.ys;
    d["label"] = p.label ? py::cast(std::string(to_string(*p.label))) : py::none();
    d["name"] = p.name;
    return d;
}

PipelineConfig make_config(Eigen::Index m, double b_alpha, std::optional<std::vector<double>> grid, std::uint64_t seed,
                           std::optional<double> lengthscale, double noise, const std::string& subset,
                           const std::string& weighting, const std::string& backend, std::optional<double> b_d,
                           bool standardize) {
    PipelineConfig c;
    c.m = m;
    c.b_alpha = b_alpha;
    if (grid) {
        c.mode = ScoreMode::TrendSlope;
        c.grid = *grid;
    }
    c.seed = seed;
    c.fixed_lengthscale = lengthscale;
    c.noise_variance = noise;
    c.subset = parse_subset_method(subset);
    c.weighting = parse_weighting(weighting);
    c.solver.backend = parse_backend(backend);
    c.b_d = b_d;
    c.standardize = standardize;
    return c;
}

}  // namespace

PYBIND11_MODULE(_vcei, m) {
    m.doc() = "Cause-effect identification by maximal variation of the cause marginal";

    py::register_exception<Error>(m, "VceiError", PyExc_RuntimeError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<InfeasibleBoundError>(m, "InfeasibleBoundError", PyExc_ValueError);
    py::register_exception<MalformedFileError>(m, "MalformedFileError", PyExc_OSError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    m.def(
        "gram",
        [](const Matrix& a, std::optional<Matrix> b, double lengthscale, double output_scale) {
            const Kernel k = Kernel::squared_exponential(lengthscale, output_scale);
            return b ? gram(k, a, *b).values : gram(k, a).values;
        },
        py::arg("a"), py::arg("b") = py::none(), py::arg("lengthscale") = 1.0, py::arg("output_scale") = 1.0);

    m.def(
        "select_lengthscale",
        [](const Matrix& samples, const std::string& method, std::uint64_t fold_seed) {
            LengthscaleOptions o;
            o.fold_seed = fold_seed;
            return select_lengthscale(samples, parse_lengthscale_method(method), o);
        },
        py::arg("samples"), py::arg("method") = "kdecv5", py::arg("fold_seed") = 0);

    m.def(
        "mmd2_biased",
        [](const Matrix& a, const Matrix& b, double lengthscale) {
            return mmd2_biased(Kernel::squared_exponential(lengthscale), a, b).value;
        },
        py::arg("a"), py::arg("b"), py::arg("lengthscale") = 1.0);

    m.def(
        "mmd2_weighted_vs_uniform",
        [](const Matrix& samples, const Vector& weights, double lengthscale) {
            return mmd2_weighted_vs_uniform(gram(Kernel::squared_exponential(lengthscale), samples),
                                            WeightVector(weights))
                .value;
        },
        py::arg("samples"), py::arg("weights"), py::arg("lengthscale") = 1.0);

    m.def("project_to_simplex", &project_to_simplex, py::arg("v"));

    m.def(
        "generate_synthetic",
        [](const std::string& family, Eigen::Index n, std::uint64_t seed) {
            return pair_dict(generate_synthetic(parse_family(family), n, seed));
        },
        py::arg("family"), py::arg("n"), py::arg("seed") = 0);

    m.def(
        "load_pair", [](const std::filesystem::path& path) { return pair_dict(load_pair(path)); }, py::arg("path"));

    m.def(
        "solve_variation",
        [](const Matrix& subset, std::optional<Matrix> full, double lengthscale, std::optional<double> b_alpha,
           std::optional<double> b_d, const std::string& backend) {
            const Kernel k = Kernel::squared_exponential(lengthscale);
            const Matrix& f = full ? *full : subset;
            const SdrProblem p = build_problem(gram(k, subset).values, gram(k, subset, f).values, gram_sum(k, f),
                                               b_alpha, b_d);
            SolverOptions o;
            o.backend = parse_backend(backend);
            const SdrSolution s = solve(p, o);
            py::dict d;
            d["weights"] = s.weights.values();
            d["lifted"] = s.lifted;
            d["sdr_objective"] = s.sdr_objective;
            d["recovered_objective"] = s.recovered_objective;
            d["rank_one_gap"] = s.rank_one_gap;
            d["status"] = std::string(to_string(s.status));
            d["backend"] = s.backend;
            d["max_violation"] = s.max_violation;
            return d;
        },
        py::arg("subset"), py::arg("full") = py::none(), py::arg("lengthscale") = 1.0,
        py::arg("b_alpha") = py::none(), py::arg("b_d") = py::none(), py::arg("backend") = "auto");

    py::class_<WeightedGp>(m, "WeightedGp")
        .def_static(
            "fit",
            [](const Matrix& x, const Matrix& y, std::optional<Vector> weights, double lengthscale, double noise,
               const std::string& scheme, std::uint64_t seed) {
                GpOptions o;
                o.noise_variance = noise;
                o.scheme = parse_weighting(scheme);
                o.resample_seed = seed;
                std::optional<WeightVector> w;
                if (weights) w = WeightVector(*weights);
                return WeightedGp::fit(x, y, w, Kernel::squared_exponential(lengthscale), o);
            },
            py::arg("x"), py::arg("y"), py::arg("weights") = py::none(), py::arg("lengthscale") = 1.0,
            py::arg("noise_variance") = 1e-2, py::arg("scheme") = "precision", py::arg("seed") = 0)
        .def("predict_mean", &WeightedGp::predict_mean, py::arg("query"))
        .def_property_readonly("training_size", &WeightedGp::training_size)
        .def_property_readonly("effective_count", &WeightedGp::effective_count);

    m.def(
        "identify_json",
        [](const Matrix& x, const Matrix& y, std::optional<std::string> label, const std::string& name,
           Eigen::Index m_, double b_alpha, std::optional<std::vector<double>> grid, std::uint64_t seed,
           std::optional<double> lengthscale, double noise, const std::string& subset, const std::string& weighting,
           const std::string& backend, std::optional<double> b_d, bool standardize) {
            const DataPair p = make_pair(x, y, label, name);
            const PipelineConfig c = make_config(m_, b_alpha, grid, seed, lengthscale, noise, subset, weighting,
                                                 backend, b_d, standardize);
            py::gil_scoped_release release;
            return run_pipeline(p, c).to_json().dump();
        },
        py::arg("x"), py::arg("y"), py::arg("label") = py::none(), py::arg("name") = "pair", py::arg("m") = 100,
        py::arg("b_alpha") = 0.2, py::arg("grid") = py::none(), py::arg("seed") = 0,
        py::arg("lengthscale") = py::none(), py::arg("noise_variance") = 1e-2, py::arg("subset") = "random",
        py::arg("weighting") = "precision", py::arg("backend") = "auto", py::arg("b_d") = py::none(),
        py::arg("standardize") = true);
}
