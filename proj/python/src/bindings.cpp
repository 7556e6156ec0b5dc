#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "htbb/benchmarks.hpp"
#include "htbb/errors.hpp"
#include "htbb/ht_tree.hpp"
#include "htbb/maxvol.hpp"
#include "htbb/oracle.hpp"
#include "htbb/runner.hpp"
#include "htbb/sweep.hpp"

namespace py = pybind11;
using namespace htbb;

namespace {

std::vector<int> as_index(const py::handle& obj) { return obj.cast<std::vector<int>>(); }

std::vector<MultiIndex> as_indices(const py::handle& obj) { return obj.cast<std::vector<MultiIndex>>(); }

py::dict report_dict(const RunReport& r) {
    py::dict d;
    d["mode"] = r.mode;
    d["evaluations"] = r.evaluations;
    d["best_index"] = r.best_index;
    d["best_value"] = r.best_value;
    d["rel_error"] = r.rel_error ? py::cast(*r.rel_error) : py::none();
    d["updates"] = r.updates;
    d["stop_reason"] = r.stop_reason;
    py::list trace;
    for (const auto& p : r.trace) trace.append(py::make_tuple(p.evaluations, p.value));
    d["trace"] = trace;
    d["surrogate"] = r.surrogate ? py::cast(HTTensor(*r.surrogate)) : py::none();
    return d;
}

Goal goal_of(bool maximize) { return maximize ? Goal::max : Goal::min; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hierarchical Tucker cross approximation and optimization";

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    py::class_<TreeTopology>(m, "TreeTopology")
        .def_static("balanced", &TreeTopology::balanced, py::arg("mode_sizes"))
        .def_property_readonly("dim", &TreeTopology::dim)
        .def_property_readonly("size", &TreeTopology::size)
        .def_property_readonly("root", &TreeTopology::root)
        .def_property_readonly("depth", &TreeTopology::depth)
        .def_property_readonly("mode_sizes",
                               [](const TreeTopology& t) { return std::vector<int>(t.mode_sizes().begin(), t.mode_sizes().end()); })
        .def_property_readonly("leaf_order",
                               [](const TreeTopology& t) { return std::vector<int>(t.leaf_order().begin(), t.leaf_order().end()); })
        .def("level_widths", &TreeTopology::level_widths)
        .def("parent", [](const TreeTopology& t, int id) { return t.node(id).parent; })
        .def("children", [](const TreeTopology& t, int id) { return t.node(id).children; })
        .def("is_active", [](const TreeTopology& t, int id) { return t.node(id).active; });

    py::class_<HTTensor>(m, "HTTensor")
        .def_property_readonly("topology", &HTTensor::topology)
        .def("rank", &HTTensor::rank, py::arg("node"))
        .def("evaluate", [](const HTTensor& t, const py::handle& index) { return t.evaluate(as_index(index)); })
        .def("__call__", [](const HTTensor& t, const py::handle& index) { return t.evaluate(as_index(index)); })
        .def("evaluate_batch",
             [](const HTTensor& t, const py::handle& indices) {
                 const auto v = t.evaluate_batch(as_indices(indices));
                 return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
             })
        .def(
            "materialize",
            [](const HTTensor& t, std::size_t cap) {
                const auto v = t.materialize(cap);
                const auto sizes = t.topology().mode_sizes();
                std::vector<py::ssize_t> shape(sizes.begin(), sizes.end());
                py::array_t<double> out(shape);
                std::copy(v.begin(), v.end(), out.mutable_data());
                return out;
            },
            py::arg("cap") = HTTensor::default_materialize_cap)
        .def("to_json", &HTTensor::to_json)
        .def_static("from_json", [](const std::string& text) { return HTTensor::from_json(text); })
        .def("save", &HTTensor::save)
        .def_static("load", &HTTensor::load);

    py::class_<Oracle>(m, "Oracle")
        .def(py::init([](py::function f, std::vector<int> mode_sizes, std::size_t budget) {
                 Oracle::Function call = [f](std::span<const int> index) {
                     py::gil_scoped_acquire gil;
                     return f(py::tuple(py::cast(std::vector<int>(index.begin(), index.end())))).cast<double>();
                 };
                 return new Oracle(std::move(call), std::move(mode_sizes), budget);
             }),
             py::arg("function"), py::arg("mode_sizes"), py::arg("budget"))
        .def_static(
            "benchmark",
            [](const std::string& name, int dim, int nodes, std::size_t budget) {
                return new Oracle(make_oracle(name, dim, nodes, budget));
            },
            py::arg("name"), py::arg("dim"), py::arg("nodes") = 8, py::arg("budget") = 10000,
            py::return_value_policy::take_ownership)
        .def_property_readonly("dim", &Oracle::dim)
        .def_property_readonly("budget", &Oracle::budget)
        .def_property_readonly("evaluations", &Oracle::evaluations)
        .def_property_readonly("remaining", &Oracle::remaining)
        .def("__call__", [](Oracle& o, const py::handle& index) { return o(as_index(index)); })
        .def("evaluate_uncounted", [](const Oracle& o, const py::handle& index) { return o.evaluate_uncounted(as_index(index)); })
        .def("cached", [](const Oracle& o, const py::handle& index) { return o.cached(as_index(index)); })
        .def("export_cache", [](const Oracle& o, const std::filesystem::path& path) { o.cache().export_csv(path); })
        .def("import_cache", &Oracle::import_cache);

    py::class_<SweepConfig>(m, "SweepConfig")
        .def(py::init<>())
        .def_readwrite("rank", &SweepConfig::rank)
        .def_readwrite("dr", &SweepConfig::dr)
        .def_readwrite("eps", &SweepConfig::eps)
        .def_readwrite("alpha", &SweepConfig::alpha)
        .def_readwrite("seed", &SweepConfig::seed)
        .def_readwrite("max_rank", &SweepConfig::max_rank)
        .def_readwrite("freeze", &SweepConfig::freeze);

    m.def(
        "ht_cross",
        [](Oracle& oracle, const TreeTopology& topology, const SweepConfig& config) {
            return report_dict(ht_cross(oracle, topology, config).report);
        },
        py::arg("oracle"), py::arg("topology"), py::arg("config") = SweepConfig{});
    m.def(
        "ht_opt",
        [](Oracle& oracle, const TreeTopology& topology, const SweepConfig& config, bool maximize) {
            return report_dict(ht_opt(oracle, topology, config, goal_of(maximize)));
        },
        py::arg("oracle"), py::arg("topology"), py::arg("config") = SweepConfig{}, py::arg("maximize") = false);
    m.def(
        "random_search",
        [](Oracle& oracle, std::size_t budget, std::uint64_t seed, bool maximize) {
            return report_dict(random_search(oracle, budget, seed, goal_of(maximize)));
        },
        py::arg("oracle"), py::arg("budget"), py::arg("seed") = 0, py::arg("maximize") = false);
    m.def(
        "relative_l2_error",
        [](const HTTensor& surrogate, const Oracle& oracle, int n_test, std::uint64_t seed) {
            return relative_l2_error(surrogate, oracle, n_test, seed).value;
        },
        py::arg("surrogate"), py::arg("oracle"), py::arg("n_test") = 10000, py::arg("seed") = 0);

    m.def("maxvol_square", &maxvol_square, py::arg("a"), py::arg("tol") = 1.01, py::arg("max_iters") = 100);
    m.def(
        "maxvol_rect", [](const Matrix& a, int dr, double tol) { return maxvol_rect(a, dr, tol); }, py::arg("a"),
        py::arg("dr"), py::arg("tol") = 1.0);

    m.def("benchmarks", [] {
        std::vector<std::string> names;
        for (const auto& b : benchmarks()) names.push_back(b.name);
        return names;
    });
    m.def("benchmark_domain", [](const std::string& name) {
        const auto& b = find_benchmark(name);
        return py::make_tuple(b.lower, b.upper);
    });
    m.def(
        "eval_benchmark", [](const std::string& name, std::vector<double> x) { return eval_benchmark(name, x); },
        py::arg("name"), py::arg("x"));
    m.def("chebyshev_grid", &chebyshev_grid, py::arg("n"), py::arg("a"), py::arg("b"));

    m.def(
        "run",
        [](const std::string& mode, const std::string& function, int dim, int grid, int rank, std::size_t budget,
           std::uint64_t seed, int test, bool maximize) {
            RunSpec spec;
            spec.mode = mode;
            spec.function = function;
            spec.dim = dim;
            spec.grid = grid;
            spec.rank = rank;
            spec.budget = budget;
            spec.seed = seed;
            spec.test = test;
            spec.maximize = maximize;
            validate(spec);
            return report_json(spec, run_experiment(spec));
        },
        py::arg("mode"), py::arg("function"), py::arg("dim") = 256, py::arg("grid") = 8, py::arg("rank") = 2,
        py::arg("budget") = 10000, py::arg("seed") = 0, py::arg("test") = 10000, py::arg("maximize") = false);
}
