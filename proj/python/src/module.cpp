#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dirpart/continuum.hpp"
#include "dirpart/domain.hpp"
#include "dirpart/errors.hpp"
#include "dirpart/geograph.hpp"
#include "dirpart/harness.hpp"
#include "dirpart/kernels.hpp"
#include "dirpart/partitioner.hpp"
#include "dirpart/transport.hpp"

namespace py = pybind11;
using namespace dirpart;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const Array& a) {
  if (a.ndim() == 1) return PointCloud(1, std::vector<double>(a.data(), a.data() + a.shape(0)));
  if (a.ndim() != 2) throw InputError("points must be a 1-d or 2-d array");
  return PointCloud(static_cast<int>(a.shape(1)),
                    std::vector<double>(a.data(), a.data() + a.shape(0) * a.shape(1)));
}

Array from_cloud(const PointCloud& c) {
  Array out({static_cast<py::ssize_t>(c.size()), static_cast<py::ssize_t>(c.dim())});
  std::copy(c.coords().begin(), c.coords().end(), out.mutable_data());
  return out;
}

EmpiricalPair to_pair(const Array& x, const Array& f, std::optional<Array> m) {
  auto support = to_cloud(x);
  const std::size_t n = support.size();
  const std::size_t k = f.ndim() == 1 ? 1 : static_cast<std::size_t>(f.shape(1));
  if (static_cast<std::size_t>(f.shape(0)) != n) throw InputError("values and points differ in length");
  std::vector<double> values(f.data(), f.data() + n * k);
  if (!m) return EmpiricalPair::uniform(std::move(support), std::move(values), k);
  EmpiricalPair p{std::move(support), std::vector<double>(m->data(), m->data() + m->size()), k, std::move(values)};
  p.validate();
  return p;
}

py::dict interval_dict(const IntervalPartition& p) {
  py::dict d;
  d["k"] = p.k;
  d["lengths"] = p.lengths;
  d["breakpoints"] = p.breakpoints;
  d["objective"] = p.objective;
  d["degenerate"] = p.degenerate;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dirpart, m) {
  m.doc() = "Graph Dirichlet partitions of point clouds";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def(
      "sample",
      [](const std::string& domain_json, std::size_t n, std::uint64_t seed, std::optional<double> margin) {
        const Domain d = parse_domain(domain_json);
        const auto space = margin ? SamplingSpace::with_margin(d, *margin) : SamplingSpace::same(d);
        const auto s = sample_iid(space, n, seed);
        py::array_t<bool> mask(static_cast<py::ssize_t>(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i) mask.mutable_at(i) = s.admissible[i] != 0;
        return py::make_tuple(from_cloud(s.points), mask);
      },
      py::arg("domain"), py::arg("n"), py::arg("seed") = 0, py::arg("margin") = py::none());

  m.def(
      "partition",
      [](const Array& points, py::array_t<bool> admissible, const std::string& kernel, double eps,
         std::size_t k, const std::string& mode, std::size_t restarts, std::size_t max_iterations,
         std::uint64_t seed) {
        SampleSet s;
        s.points = to_cloud(points);
        s.seed = seed;
        if (static_cast<std::size_t>(admissible.size()) != s.size()) throw InputError("mask and points differ in length");
        for (py::ssize_t i = 0; i < admissible.size(); ++i) s.admissible.push_back(admissible.at(i) ? 1 : 0);
        KernelProfile profile;
        profile.kind = parse_kernel(kernel);
        const auto graph = build_graph(s, profile, eps);
        SolverConfig cfg;
        cfg.k = k;
        cfg.mode = parse_mode(mode);
        cfg.restarts = restarts;
        cfg.max_iterations = max_iterations;
        cfg.seed = seed;
        SolveResult r;
        {
          py::gil_scoped_release release;
          r = solve(graph, cfg);
        }
        py::dict d;
        d["labels"] = r.best.labels;
        d["eigenvalues"] = r.best.eigenvalues();
        d["objective"] = r.best.objective;
        d["converged"] = r.best.converged;
        d["iterations"] = r.best.iterations;
        d["restart_objectives"] = r.restart_objectives;
        return d;
      },
      py::arg("points"), py::arg("admissible"), py::arg("kernel") = "exp", py::arg("eps"), py::arg("k") = 2,
      py::arg("mode") = "dirichlet", py::arg("restarts") = 20, py::arg("max_iterations") = 300,
      py::arg("seed") = 0);

  m.def(
      "tl2",
      [](const Array& xa, const Array& fa, const Array& xb, const Array& fb, std::optional<Array> ma,
         std::optional<Array> mb, const std::string& method) {
        TransportMethod tm;
        if (method == "exact") tm = TransportMethod::kExact;
        else if (method == "entropic") tm = TransportMethod::kEntropic;
        else throw ConfigError("unknown transport method '" + method + "'");
        const auto r = tl2_distance(to_pair(xa, fa, ma), to_pair(xb, fb, mb), tm);
        return py::make_tuple(r.distance, r.approximate);
      },
      py::arg("xa"), py::arg("fa"), py::arg("xb"), py::arg("fb"), py::arg("ma") = py::none(),
      py::arg("mb") = py::none(), py::arg("method") = "exact");

  m.def("hausdorff", [](const Array& a, const Array& b) { return hausdorff_finite(to_cloud(a), to_cloud(b)); });

  m.def("interval_dirichlet", [](std::size_t k) { return interval_dict(interval_dirichlet(k)); });
  m.def("interval_zaremba", [](std::size_t k) { return interval_dict(interval_zaremba(k)); });

  m.def(
      "surface_tension",
      [](const std::string& kernel, int dim) {
        KernelProfile p;
        p.kind = parse_kernel(kernel);
        return surface_tension(p, dim);
      },
      py::arg("kernel") = "gauss", py::arg("dim") = 2);

  m.def("normalize_config", [](const std::string& json) { return config_to_json(parse_config(json)); });

  m.def("run_sweep", [](const std::string& json) {
    const auto cfg = parse_config(json);
    RunReport r;
    {
      py::gil_scoped_release release;
      r = run_sweep(cfg);
    }
    std::ostringstream os;
    emit_report(os, r, ReportFormat::kCsv);
    return os.str();
  });
}
