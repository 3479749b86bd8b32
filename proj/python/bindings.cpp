#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "gpfractal/conditions.hpp"
#include "gpfractal/config.hpp"
#include "gpfractal/dimension.hpp"
#include "gpfractal/energy.hpp"
#include "gpfractal/errors.hpp"
#include "gpfractal/gp_sim.hpp"
#include "gpfractal/hitting.hpp"
#include "gpfractal/metrics.hpp"
#include "gpfractal/report.hpp"

namespace py = pybind11;
using namespace gpfractal;

namespace {

ScaleFunction scale(const std::string& spec) { return ScaleFunction::parse(spec); }

TimeSet time_set(const ScaleFunction& f, const std::string& E_json) {
  const Json j = parse_config_text(E_json, "E");
  return parse_time_set(ConfigNode(j, "E"), f);
}

SpatialSet spatial_set(const std::string& F_json, std::size_t d) {
  const Json j = parse_config_text(F_json, "F");
  return parse_spatial_set(ConfigNode(j, "F"), d);
}

CovKind kind_of(const std::string& k) {
  if (k == "stationary") return CovKind::StationaryIncrements;
  if (k == "volterra") return CovKind::Volterra;
  throw ValidationError("kind", "expected \"stationary\" or \"volterra\"");
}

std::string dump(const Json& j) { return j.dump(); }

py::array_t<double> matrix(const Eigen::MatrixXd& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto v = out.mutable_unchecked<2>();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i, j) = m(i, j);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian-process fractal geometry core";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ScaleFunction>(m, "ScaleFunction")
      .def(py::init(&scale), py::arg("spec"))
      .def_property_readonly("spec", &ScaleFunction::spec)
      .def_property_readonly("x_max", &ScaleFunction::x_max)
      .def_property_readonly("family", [](const ScaleFunction& f) { return std::string(family_name(f.family())); })
      .def("__call__", &ScaleFunction::eval, py::arg("r"))
      .def("derivative", &ScaleFunction::derivative, py::arg("r"))
      .def("inverse", &ScaleFunction::inverse, py::arg("v"), py::arg("tol") = 1e-12)
      .def("log_inverse", &ScaleFunction::log_inverse, py::arg("log_v"))
      .def("psi", &ScaleFunction::psi, py::arg("r"))
      .def("log_value_at", &ScaleFunction::log_value_at, py::arg("L"))
      .def("__repr__", [](const ScaleFunction& f) { return "ScaleFunction('" + f.spec() + "')"; });

  m.def("time_grid", [](const std::string& gamma, const std::string& E, std::size_t grid_n) {
    const auto f = scale(gamma);
    return time_grid(time_set(f, E), grid_n);
  });

  m.def(
      "covariance",
      [](const std::string& gamma, const std::vector<double>& grid, const std::string& kind) {
        return matrix(build_covariance(scale(gamma), grid, kind_of(kind)).matrix());
      },
      py::arg("gamma"), py::arg("grid"), py::arg("kind") = "stationary");

  m.def(
      "sample_paths",
      [](const std::string& gamma, const std::vector<double>& grid, std::size_t d, std::size_t n_paths, std::uint64_t seed,
         const std::string& kind) {
        CovMatrix cov = build_covariance(scale(gamma), grid, kind_of(kind));
        PathBatch b;
        {
          py::gil_scoped_release release;
          cov.factorize();
          b = sample_paths(cov, d, n_paths, seed);
        }
        py::array_t<double> out({n_paths, grid.size(), d});
        std::copy(b.values.begin(), b.values.end(), out.mutable_data());
        return out;
      },
      py::arg("gamma"), py::arg("grid"), py::arg("d"), py::arg("n_paths"), py::arg("seed"), py::arg("kind") = "stationary");

  m.def("commensurability", [](const std::string& gamma, const std::vector<double>& grid, const std::string& kind) {
    const auto f = scale(gamma);
    return dump(to_json(commensurability_report(build_covariance(f, grid, kind_of(kind)), f)));
  });

  m.def("box_dimension", [](py::array_t<double, py::array::c_style | py::array::forcecast> pts) {
    if (pts.ndim() != 2) throw ValidationError("points", "expected an (n, dim) array");
    const std::span<const double> s(pts.data(), static_cast<std::size_t>(pts.size()));
    return dump(to_json(box_dimension_euclidean(s, static_cast<std::size_t>(pts.shape(1)))));
  });

  m.def("dim_delta", [](const std::string& gamma, const std::string& E) {
    const auto f = scale(gamma);
    return dump(to_json(dim_delta_estimate(time_set(f, E), f)));
  });

  m.def("image_dimension", [](const std::string& gamma, const std::string& E, std::size_t d, std::size_t n_paths,
                              std::size_t grid_n, std::uint64_t seed) {
    const auto f = scale(gamma);
    const TimeSet set = time_set(f, E);
    py::gil_scoped_release release;
    return dump(to_json(image_dimension_experiment(f, set, d, n_paths, grid_n, seed)));
  });

  m.def("intersection_dimension", [](const std::string& gamma, const std::string& E, const std::string& F, std::size_t d,
                                     std::size_t n_paths, double tol, std::uint64_t seed, std::size_t grid_n) {
    const auto f = scale(gamma);
    const TimeSet set = time_set(f, E);
    const SpatialSet target = spatial_set(F, d);
    py::gil_scoped_release release;
    return dump(to_json(intersection_dimension_experiment(f, set, target, d, n_paths, tol, seed, grid_n)));
  });

  m.def("cantor", [](const std::string& gamma, double zeta, int depth, double eps0) {
    return dump(to_json(build_cantor(scale(gamma), zeta, depth, eps0)));
  });

  m.def(
      "minimize_energy",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> K, double tol, int max_iter) {
        if (K.ndim() != 2 || K.shape(0) != K.shape(1)) throw ValidationError("K", "expected a square matrix");
        const auto n = static_cast<std::size_t>(K.shape(0));
        std::vector<double> atoms(n);
        for (std::size_t i = 0; i < n; ++i) atoms[i] = static_cast<double>(i);
        const KernelMatrix kernel(std::move(atoms), 1, 1.0, 0.0, std::vector<double>(K.data(), K.data() + K.size()));
        const auto res = minimize_energy(kernel, tol, max_iter);
        return py::make_tuple(res.measure.weights, res.energy, res.gap);
      },
      py::arg("K"), py::arg("tol") = 1e-6, py::arg("max_iter") = 20000);

  m.def("capacity", [](const std::string& gamma, const std::string& E, double beta, const std::vector<double>& resolutions,
                       std::size_t grid_n) {
    const auto f = scale(gamma);
    const auto times = time_grid(time_set(f, E), grid_n);
    py::gil_scoped_release release;
    return dump(to_json(capacity_estimate(times, 1, MetricModel::stationary(f), beta, resolutions)));
  });

  m.def("integral_ratio", [](const std::string& gamma, double L) { return integral_ratio(scale(gamma), L); });
  m.def(
      "f_gamma", [](const std::string& gamma, double r, double l) { return f_gamma(scale(gamma), r, l); }, py::arg("gamma"),
      py::arg("r"), py::arg("l") = 1.0);
  m.def("check_conditions", [](const std::string& gamma, double eps) {
    const auto f = scale(gamma);
    Json out = Json::array();
    for (const auto& v : {check_strong_condition(f), check_weak_condition(f, eps), psi_sqrtlog_criterion(f)}) {
      out.push_back(to_json(v));
    }
    return dump(out);
  });

  m.def("hit_probability", [](const std::string& gamma, const std::string& E, const std::string& F, std::size_t d,
                              double tol, std::size_t n_paths, std::uint64_t seed, std::size_t grid_n) {
    const auto f = scale(gamma);
    const TimeSet set = time_set(f, E);
    const SpatialSet target = spatial_set(F, d);
    HitOptions opt;
    opt.grid_n = grid_n;
    py::gil_scoped_release release;
    return dump(to_json(hit_probability_mc(f, set, target, d, tol, n_paths, seed, opt)));
  });

  m.def("grid_guard", [](const std::string& gamma, const std::string& E, std::size_t grid_n, std::size_t d) {
    const auto f = scale(gamma);
    const TimeSet set = time_set(f, E);
    return grid_guard(f, set, time_grid(set, grid_n), d);
  });

  m.def("small_ball_sweep", [](const std::string& gamma, double a, double b, double t0, const std::vector<double>& radii,
                               const std::vector<double>& z, std::size_t n_paths, std::uint64_t seed) {
    const auto f = scale(gamma);
    py::gil_scoped_release release;
    return dump(to_json(small_ball_sweep(f, a, b, t0, radii, z, n_paths, seed)));
  });

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
