#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <variant>

#include "opa/engine.hpp"
#include "opa/jobs.hpp"
#include "opa/projection.hpp"

namespace py = pybind11;
using namespace opa;

namespace {

// Python-side data: a coefficient list (polynomial) or a Series.
using PyElement = std::variant<std::vector<cplx>, TruncSeries>;

Element to_element(const PyElement& e) {
  if (const auto* c = std::get_if<std::vector<cplx>>(&e)) return Element(CPoly(*c));
  return Element(std::get<TruncSeries>(e));
}

std::vector<cplx> coeffs(const CPoly& p) { return {p.coeffs().begin(), p.coeffs().end()}; }

py::dict opa_dict(const OpaResult& r) {
  py::dict d;
  d["n"] = r.n;
  d["coefficients"] = coeffs(r.p_star);
  d["distance_sq"] = r.distance_sq;
  d["orthogonality_residual"] = r.orthogonality_residual;
  d["pf_at_zero"] = r.pf_at_zero;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Optimal polynomial approximants in weighted Hardy spaces";

  static py::exception<Error> error_type(m, "OpaError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = static_cast<const py::object&>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::enum_<Extension>(m, "Extension")
      .value("ratio", Extension::ratio)
      .value("constant", Extension::constant);

  py::class_<WeightSequence>(m, "Space")
      .def_static("dirichlet", &WeightSequence::dirichlet, py::arg("alpha"))
      .def_static("hardy", &WeightSequence::hardy)
      .def_static("custom", py::overload_cast<std::vector<double>, Extension>(&WeightSequence::custom),
                  py::arg("weights"), py::arg("extension") = Extension::ratio)
      .def_static(
          "multiplier", [](const std::vector<cplx>& mc) { return WeightSequence::multiplier(CPoly(mc)); },
          py::arg("m"))
      .def("weight", &WeightSequence::weight, py::arg("k"))
      .def_property_readonly("is_diagonal", &WeightSequence::is_diagonal)
      .def("inner", [](const WeightSequence& w, const PyElement& a, const PyElement& b, double eps) {
             return inner(w, to_element(a), to_element(b), eps).value;
           },
           py::arg("a"), py::arg("b"), py::arg("eps") = 1e-14);

  py::class_<TruncSeries>(m, "Series")
      .def_static("geometric", &TruncSeries::geometric, py::arg("c"), py::arg("length") = 0)
      .def_static("blaschke", &TruncSeries::blaschke_factor, py::arg("beta"), py::arg("length") = 0)
      .def_static(
          "rational",
          [](const std::vector<cplx>& num, const std::vector<cplx>& den, std::size_t len) {
            return TruncSeries::rational(CPoly(num), CPoly(den), len);
          },
          py::arg("num"), py::arg("den"), py::arg("length") = 0)
      .def_static("polynomial", [](const std::vector<cplx>& c) { return TruncSeries::from_poly(CPoly(c)); })
      .def("__mul__", [](const TruncSeries& a, const TruncSeries& b) { return series_mul(a, b); })
      .def("__len__", &TruncSeries::size)
      .def("coefficient", [](const TruncSeries& s, std::size_t k) { return s.extended(k + 1).coeff(k); })
      .def("coefficients", [](const TruncSeries& s) { return std::vector<cplx>(s.coeffs().begin(), s.coeffs().end()); })
      .def("__call__", [](const TruncSeries& s, cplx z) { return s.eval(z).value; });

  m.def(
      "optimal_approximant",
      [](const WeightSequence& w, const PyElement& f, const PyElement& g, std::size_t n) {
        return opa_dict(optimal_approximant(w, to_element(f), to_element(g), n));
      },
      py::arg("space"), py::arg("f"), py::arg("g") = std::vector<cplx>{1.0}, py::arg("n"));

  m.def(
      "sweep",
      [](const WeightSequence& w, const PyElement& f, const PyElement& g, std::size_t n_max, unsigned threads) {
        py::list out;
        std::vector<OpaResult> rows;
        {
          py::gil_scoped_release release;
          rows = sweep(w, to_element(f), to_element(g), n_max, SweepOptions{threads});
        }
        for (const auto& r : rows) out.append(opa_dict(r));
        return out;
      },
      py::arg("space"), py::arg("f"), py::arg("g") = std::vector<cplx>{1.0}, py::arg("n_max"), py::arg("threads") = 1);

  m.def(
      "taylor_residual",
      [](const WeightSequence& w, const std::vector<cplx>& f, std::size_t n) { return taylor_residual(w, CPoly(f), n); },
      py::arg("space"), py::arg("f"), py::arg("n"));

  m.def(
      "detect_stabilization",
      [](const WeightSequence& w, const PyElement& f, const PyElement& g, std::size_t n_max, double eps) {
        const auto rep = detect_stabilization(w, to_element(f), to_element(g), n_max, eps);
        py::dict d;
        d["stabilized"] = rep.stabilized;
        d["M"] = rep.M ? py::cast(*rep.M) : py::none();
        d["coefficients"] = rep.p_M ? py::cast(coeffs(*rep.p_M)) : py::none();
        d["certificate"] = std::string(to_string(rep.certificate));
        d["window_deviation"] = rep.window_deviation;
        d["detail"] = rep.detail;
        if (rep.stabilized && w.is_diagonal()) {
          const auto dossier = verify_main_theorem(w, to_element(f), rep);
          py::dict checks;
          for (const auto& c : dossier.checks) checks[py::str(c.name)] = c.passed;
          d["dossier"] = checks;
        }
        return d;
      },
      py::arg("space"), py::arg("f"), py::arg("g") = std::vector<cplx>{1.0}, py::arg("n_max"),
      py::arg("eps") = kStabilizationEps);

  m.def(
      "is_reproducible",
      [](const WeightSequence& w, cplx beta, unsigned order) {
        const auto c = is_reproducible(w, beta, order);
        return py::make_tuple(std::string(to_string(c.verdict)), c.reason);
      },
      py::arg("space"), py::arg("beta"), py::arg("order") = 0);

  m.def(
      "kernel_coefficients",
      [](const WeightSequence& w, cplx beta, unsigned order, std::size_t k_max) {
        std::vector<cplx> out;
        for (std::size_t k = 0; k <= k_max; ++k) out.push_back(kernel_coefficient(w, KernelSpec{beta, order}, k));
        return out;
      },
      py::arg("space"), py::arg("beta"), py::arg("order") = 0, py::arg("k_max") = 20);

  m.def(
      "project_unity",
      [](const WeightSequence& w, const std::vector<cplx>& f) {
        const auto pr = project_unity(w, CPoly(f));
        py::dict d;
        d["cyclic"] = pr.cyclic();
        d["phi_at_zero"] = pr.phi_at_zero;
        d["dist_sq"] = pr.dist_sq;
        py::list terms;
        for (const auto& t : pr.terms)
          terms.append(py::make_tuple(t.kernel.beta, t.kernel.order, t.C));
        d["terms"] = terms;
        std::vector<cplx> phi;
        for (std::size_t k = 0; k < 32; ++k) phi.push_back(pr.phi_coefficient(k));
        d["phi_coefficients"] = phi;
        d["recurrence_residual"] = recurrence_oracle(w, CPoly(f), pr, 40).max_residual;
        return d;
      },
      py::arg("space"), py::arg("f"));

  m.def(
      "roman_equivalent",
      [](const WeightSequence& w, const std::vector<cplx>& f, const std::vector<cplx>& h, double eps) {
        return roman_equivalent(w, CPoly(f), CPoly(h), eps).equivalent;
      },
      py::arg("space"), py::arg("f"), py::arg("h"), py::arg("eps") = 1e-8);

  m.def(
      "factorial_convert", [](unsigned n) { return factorial_convert(n).coeffs; }, py::arg("n"));

  m.def(
      "run_job",
      [](const std::string& job_json, unsigned threads) {
        const JobSpec job = parse_job(nlohmann::json::parse(job_json));
        return render(run_job(job, threads), job.format);
      },
      py::arg("job"), py::arg("threads") = 1);
}
