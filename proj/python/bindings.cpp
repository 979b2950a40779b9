#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "skillshift/chain.hpp"
#include "skillshift/cli.hpp"
#include "skillshift/errors.hpp"
#include "skillshift/ingest.hpp"
#include "skillshift/metrics.hpp"
#include "skillshift/pddl_model.hpp"
#include "skillshift/ramg.hpp"
#include "skillshift/stats.hpp"

namespace py = pybind11;
using namespace skillshift;

namespace {

// Rationals cross the boundary as fractions.Fraction.
py::object to_fraction(const Rational& value) {
  static py::object fraction = py::module_::import("fractions").attr("Fraction");
  return fraction(format_exact(value));
}

Rational from_python(const py::handle& value) {
  static py::object fraction = py::module_::import("fractions").attr("Fraction");
  return parse_rational(py::str(fraction(value)).cast<std::string>());
}

py::object from_json(const nlohmann::json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

Alternative alternative_from(const std::string& text) {
  if (text == "two-sided" || text == "two_sided") return Alternative::two_sided;
  if (text == "greater") return Alternative::greater;
  if (text == "less") return Alternative::less;
  throw py::value_error("alternative must be two-sided, greater or less");
}

py::dict modification_dict(const Modification& mod) { return from_json(to_json(mod)); }

}  // namespace

PYBIND11_MODULE(_skillshift, m) {
  m.doc() = "Scene mutation, skill chain diagnostics and evaluation metrics";

  py::register_exception<Error>(m, "Error");

  py::class_<SceneProblem>(m, "Problem")
      .def_readonly("name", &SceneProblem::problem_name)
      .def_readonly("domain", &SceneProblem::domain_name)
      .def_readonly("objects", &SceneProblem::objects)
      .def_property_readonly("init",
                             [](const SceneProblem& p) {
                               std::vector<std::string> out;
                               for (const auto& atom : p.init.atoms()) out.push_back(to_string(atom));
                               return out;
                             })
      .def("serialize", &serialize_problem)
      .def("content_id", &content_id)
      .def("__eq__", [](const SceneProblem& a, const SceneProblem& b) { return a == b; });

  m.def("parse_problem", [](const std::string& text) { return parse_problem(text); }, py::arg("text"));
  m.def("load_problem", [](const std::string& path) { return load_problem_file(path); }, py::arg("path"));

  m.def(
      "enumerate_candidates",
      [](const SceneProblem& problem, const std::string& skills, const std::string& catalog) {
        const auto registry = registry_for_problem(skills, problem.problem_name);
        py::list out;
        for (const auto& mod : enumerate_candidates(problem, registry.protected_ops(), load_catalog(catalog))) {
          out.append(modification_dict(mod));
        }
        return out;
      },
      py::arg("problem"), py::arg("skills"), py::arg("catalog"),
      "Legal single modifications, in canonical order.");

  m.def(
      "sample_variant",
      [](const SceneProblem& problem, const std::string& skills, const std::string& catalog, std::size_t k,
         std::uint64_t seed, std::vector<std::uint64_t> path) {
        const auto registry = registry_for_problem(skills, problem.problem_name);
        const auto variant =
            sample_modifications(problem, registry.protected_ops(), load_catalog(catalog), k, seed, path);
        py::list mods;
        for (const auto& mod : variant.modifications) mods.append(modification_dict(mod));
        py::dict out;
        out["modifications"] = mods;
        out["result"] = variant.result;
        return out;
      },
      py::arg("problem"), py::arg("skills"), py::arg("catalog"), py::arg("k"), py::arg("seed"),
      py::arg("path") = std::vector<std::uint64_t>{});

  m.def(
      "chain_trace", [](const std::string& spec) { return from_json(trace_to_json(load_chain_spec(spec))); },
      py::arg("spec"));

  m.def(
      "rpd", [](const py::object& ori, const py::object& mod) { return to_fraction(rpd(from_python(ori), from_python(mod))); },
      py::arg("sr_ori"), py::arg("sr_mod"));
  m.def(
      "chain_upper_bound",
      [](const py::list& rates) {
        std::vector<SuccessRate> srs;
        for (const auto& r : rates) srs.push_back(SuccessRate::from_rate(from_python(r)));
        return to_fraction(chain_upper_bound(srs));
      },
      py::arg("rates"));
  m.def(
      "dubr",
      [](const py::object& ub, const py::object& actual) {
        return to_fraction(dubr(from_python(ub), SuccessRate::from_rate(from_python(actual))));
      },
      py::arg("upper_bound"), py::arg("sr_chain"));

  m.def(
      "spearman",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::string& alternative) {
        const auto r = spearman(x, y, alternative_from(alternative));
        py::dict out;
        out["rho"] = r.rho;
        out["p_value"] = r.p_value;
        out["n"] = r.n;
        out["method"] = std::string(to_string(r.method));
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("alternative") = "two-sided");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "skillshift");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = [&] {
          py::gil_scoped_release release;
          return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }();
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a subcommand in-process; returns (exit_code, stdout, stderr).");
}
