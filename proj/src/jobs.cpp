#include "opa/jobs.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "opa/engine.hpp"
#include "opa/projection.hpp"

namespace opa {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::invalid_argument, what); }

template <class Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (std::string_view k : keys) known = known || it.key() == k;
    if (!known) bad(std::string("unknown field '") + it.key() + "' in " + where);
  }
}

double number(const json& j, const char* what) {
  if (!j.is_number()) bad(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(std::string(what) + " must be finite");
  return v;
}

std::size_t index_value(const json& j, const char* what) {
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::size_t>(j.get<long long>());
  bad(std::string(what) + " must be a nonnegative integer");
}

std::vector<cplx> trim(std::vector<cplx> c) {
  while (c.size() > 1 && c.back() == cplx{}) c.pop_back();
  if (c.empty()) c.push_back(0.0);
  return c;
}

std::string_view kind_name(WeightKind k) {
  switch (k) {
    case WeightKind::dirichlet: return "dirichlet";
    case WeightKind::custom: return "custom";
    case WeightKind::multiplier: return "multiplier";
  }
  return "dirichlet";
}

std::string_view extension_name(Extension e) {
  switch (e) {
    case Extension::ratio: return "ratio";
    case Extension::constant: return "constant";
    case Extension::formula: return "formula";
  }
  return "ratio";
}

bool is_unit_constant(const FunctionSpec& g) { return !g.den && trim(g.num) == std::vector<cplx>{1.0}; }

// Coefficient columns re, im for k <= width.
void push_coeffs(std::vector<double>& row, const CPoly& p, std::size_t width) {
  for (std::size_t k = 0; k <= width; ++k) {
    row.push_back(p[k].real());
    row.push_back(p[k].imag());
  }
}

void coeff_header(std::vector<std::string>& h, std::size_t width) {
  for (std::size_t k = 0; k <= width; ++k) {
    h.push_back("coeff_" + std::to_string(k) + "_re");
    h.push_back("coeff_" + std::to_string(k) + "_im");
  }
}

ordered_json nullable(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json certificate_json(const ReproCertificate& c) {
  return ordered_json{{"verdict", to_string(c.verdict)}, {"reason", c.reason}};
}

// ---------------------------------------------------------------- commands

JobOutput run_approximate(const JobSpec& job, unsigned threads) {
  const WeightSequence space = staged("space", [&] { return make_space(job.space); });
  const Element f = staged("f", [&] { return make_element(job.f); });
  const Element g = staged("g", [&] { return make_element(job.g); });
  if (job.taylor && !(f.is_polynomial() && is_unit_constant(job.g)))
    bad("the Taylor column needs polynomial f and g = 1");

  const std::vector<OpaResult> rows =
      staged("sweep", [&] { return sweep(space, f, g, job.n_max, SweepOptions{threads, kGramEps}); });

  JobOutput out;
  out.data["command"] = "approximate";
  out.data["job"] = serialize_job(job);
  out.csv_header = {"n", "dist_sq"};
  if (job.taylor) {
    out.csv_header.push_back("opa_residual");
    out.csv_header.push_back("taylor_residual");
  }
  coeff_header(out.csv_header, job.n_max);

  ordered_json table = ordered_json::array();
  for (const OpaResult& r : rows) {
    ordered_json row;
    row["n"] = r.n;
    row["dist_sq"] = r.distance_sq;
    row["orthogonality_residual"] = r.orthogonality_residual;
    std::vector<double> csv{static_cast<double>(r.n), r.distance_sq};
    if (job.taylor) {
      const double t = staged("taylor", [&] { return taylor_residual(space, f.poly(), r.n); });
      row["opa_residual"] = std::sqrt(r.distance_sq);
      row["taylor_residual"] = t;
      csv.push_back(std::sqrt(r.distance_sq));
      csv.push_back(t);
    }
    row["coefficients"] = coeffs_json(r.p_star.coeffs());
    push_coeffs(csv, r.p_star, job.n_max);
    table.push_back(std::move(row));
    out.csv_rows.push_back(std::move(csv));
  }
  out.data["rows"] = std::move(table);
  return out;
}

JobOutput run_stabilize(const JobSpec& job, unsigned threads) {
  const WeightSequence space = staged("space", [&] { return make_space(job.space); });
  const Element f = staged("f", [&] { return make_element(job.f); });
  const Element g = staged("g", [&] { return make_element(job.g); });
  const StabilizationReport rep = staged("stabilization", [&] {
    return detect_stabilization(space, f, g, job.n_max, job.eps, SweepOptions{threads, kGramEps});
  });

  JobOutput out;
  out.data["command"] = "stabilize";
  out.data["job"] = serialize_job(job);
  out.data["stabilized"] = rep.stabilized;
  out.data["M"] = rep.M ? ordered_json(*rep.M) : ordered_json(nullptr);
  out.data["certificate"] = to_string(rep.certificate);
  out.data["p_M"] = rep.p_M ? coeffs_json(rep.p_M->coeffs()) : ordered_json(nullptr);
  out.data["window_deviation"] = rep.window_deviation;
  out.data["orthogonality_residual"] = rep.orthogonality_residual;
  out.data["detail"] = rep.detail;

  ordered_json dossier = nullptr;
  if (rep.stabilized && space.unit_kernel_at_zero() && is_unit_constant(job.g) && f.at_zero() != cplx{}) {
    const TheoremDossier d = staged("dossier", [&] { return verify_main_theorem(space, f, rep, job.eps); });
    dossier = ordered_json::object();
    dossier["M"] = d.M;
    dossier["c"] = d.c;
    dossier["all_passed"] = d.all_passed();
    ordered_json checks = ordered_json::array();
    for (const DossierCheck& c : d.checks)
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"deviation", c.deviation}, {"detail", c.detail}});
    dossier["checks"] = std::move(checks);
  }
  out.data["dossier"] = std::move(dossier);

  out.csv_header = {"n", "dist_sq"};
  coeff_header(out.csv_header, job.n_max);
  ordered_json table = ordered_json::array();
  for (const OpaResult& r : rep.approximants) {
    table.push_back({{"n", r.n}, {"dist_sq", r.distance_sq}, {"coefficients", coeffs_json(r.p_star.coeffs())}});
    std::vector<double> csv{static_cast<double>(r.n), r.distance_sq};
    push_coeffs(csv, r.p_star, job.n_max);
    out.csv_rows.push_back(std::move(csv));
  }
  out.data["approximants"] = std::move(table);
  return out;
}

JobOutput run_project(const JobSpec& job, unsigned threads) {
  const WeightSequence space = staged("space", [&] { return make_space(job.space); });
  if (job.f.den) bad("project needs a polynomial f");
  const CPoly f(job.f.num);
  const double eps = std::min(kProjectionEps, job.eps);
  const ProjectionResult pr = staged("projection", [&] { return project_unity(space, f, eps); });

  JobOutput out;
  ordered_json& d = out.data;
  d["command"] = "project";
  d["job"] = serialize_job(job);
  d["cyclic"] = pr.cyclic();
  d["summary"] = pr.cyclic() ? "cyclic: phi = 1" : "non-cyclic: phi = 1 + sum C k";

  ordered_json zeros = ordered_json::array();
  for (const ClassifiedZero& z : pr.classification.zeros) {
    ordered_json orders = ordered_json::array();
    for (std::size_t j = 0; j < z.orders.size(); ++j) {
      ordered_json o = certificate_json(z.orders[j]);
      o["order"] = j;
      orders.push_back(std::move(o));
    }
    zeros.push_back({{"beta", complex_json(z.beta)}, {"multiplicity", z.multiplicity}, {"orders", std::move(orders)}});
  }
  d["zeros"] = std::move(zeros);
  d["Z"] = pr.classification.Z;
  d["R"] = pr.classification.R ? ordered_json(*pr.classification.R) : ordered_json(nullptr);
  d["ksf_dimension"] = pr.classification.ksf_dimension();

  ordered_json constants = ordered_json::array();
  out.csv_header = {"zero", "order", "beta_re", "beta_im", "C_re", "C_im"};
  for (const ProjectionTerm& t : pr.terms) {
    constants.push_back({{"zero", t.zero},
                         {"order", t.order},
                         {"beta", complex_json(t.kernel.beta)},
                         {"C", complex_json(t.C)}});
    out.csv_rows.push_back({static_cast<double>(t.zero), static_cast<double>(t.order), t.kernel.beta.real(),
                            t.kernel.beta.imag(), t.C.real(), t.C.imag()});
  }
  d["constants"] = std::move(constants);
  d["phi_at_zero"] = complex_json(pr.phi_at_zero);
  d["dist_sq"] = pr.dist_sq;
  d["condition_estimate"] = pr.condition_estimate;
  d["gram_entry_error"] = pr.gram_entry_error;
  d["interpolation_residual"] = pr.interpolation_residual;

  // oracle cross-checks
  ordered_json oracle;
  const std::vector<OpaResult> rows = staged("oracle sweep", [&] {
    return sweep(space, Element(f), Element(CPoly::constant(1.0)), job.n_max, SweepOptions{threads, kGramEps});
  });
  const OpaResult& last = rows.back();
  oracle["n"] = job.n_max;
  oracle["sweep_dist_sq"] = last.distance_sq;
  oracle["plateau_delta"] = last.distance_sq - pr.dist_sq;
  oracle["phi_distance"] = distance_to_phi(pr, last.p_star * f);
  constexpr std::size_t kRecurrenceK = 40;
  if (f.degree() >= 1) {
    const RecurrenceReport rec = staged("recurrence", [&] { return recurrence_oracle(space, f, pr, kRecurrenceK); });
    oracle["recurrence_K"] = rec.K;
    oracle["recurrence_residual"] = rec.max_residual;
  } else {
    oracle["recurrence_K"] = 0;
    oracle["recurrence_residual"] = 0.0;
  }
  if (space.kind() == WeightKind::dirichlet && space.alpha() == 0.0) {
    const BlaschkeProjection bp = staged("blaschke", [&] { return blaschke_projection(f); });
    double gap = 0.0;
    for (std::size_t k = 0; k <= kRecurrenceK; ++k) gap = std::max(gap, std::abs(bp.phi.extended(k + 1).coeff(k) - pr.phi_coefficient(k)));
    oracle["blaschke_phi_at_zero"] = complex_json(bp.phi_at_zero);
    oracle["blaschke_coefficient_gap"] = gap;
  }
  d["oracle"] = std::move(oracle);
  return out;
}

JobOutput run_diagnose(const JobSpec& job, unsigned threads) {
  const WeightSequence space = staged("space", [&] { return make_space(job.space); });
  const Element f = staged("f", [&] { return make_element(job.f); });
  std::optional<double> plateau;
  if (f.is_polynomial() && space.is_diagonal()) {
    try {
      plateau = project_unity(space, f.poly(), std::min(kProjectionEps, job.eps)).dist_sq;
    } catch (const Error&) {
      plateau.reset();
    }
  }
  const CyclicityDiagnostic diag = staged("diagnostic", [&] {
    return cyclicity_diagnostic(space, f, job.n_max, plateau, SweepOptions{threads, kGramEps});
  });

  JobOutput out;
  out.data["command"] = "diagnose";
  out.data["job"] = serialize_job(job);
  out.csv_header = {"n", "dist_sq"};
  ordered_json rows = ordered_json::array();
  for (const DiagnosticRow& r : diag.rows) {
    rows.push_back({{"n", r.n},
                    {"dist_sq", r.distance_sq},
                    {"one_minus_pf0", r.one_minus_pf0},
                    {"pf0_imag", r.pf0_imag}});
    out.csv_rows.push_back({static_cast<double>(r.n), r.distance_sq});
  }
  out.data["rows"] = std::move(rows);
  out.data["identity_holds"] = diag.identity_holds;
  out.data["identity_max_gap"] = diag.identity_max_gap;
  out.data["decreasing"] = diag.decreasing;
  out.data["expected_plateau"] = nullable(diag.expected_plateau);
  out.data["verdict"] = to_string(diag.verdict);
  out.data["detail"] = diag.detail;
  return out;
}

JobOutput run_kernel(const JobSpec& job) {
  const WeightSequence space = staged("space", [&] { return make_space(job.space); });
  const KernelSpec spec{job.kernel.beta, job.kernel.order, job.kernel.flavor};
  const ReproCertificate cert = staged("reproducibility", [&] { return is_reproducible(space, spec.beta, spec.order); });
  if (cert.verdict == Verdict::no) throw StageError("reproducibility", Error(ErrorCode::not_reproducible, cert.reason));
  if (cert.verdict == Verdict::undecidable) throw StageError("reproducibility", Error(ErrorCode::undecidable, cert.reason));

  JobOutput out;
  ordered_json& d = out.data;
  d["command"] = "kernel";
  d["job"] = serialize_job(job);
  d["reproducible"] = certificate_json(cert);
  out.csv_header = {"k", "coeff_re", "coeff_im"};
  std::vector<cplx> coeffs;
  for (std::size_t k = 0; k <= job.kernel.k_max; ++k) {
    const cplx c = kernel_coefficient(space, spec, k);
    coeffs.push_back(c);
    out.csv_rows.push_back({static_cast<double>(k), c.real(), c.imag()});
  }
  d["coefficients"] = coeffs_json(coeffs);
  if (spec.flavor == KernelFlavor::kernel_for_derivatives) {
    const Certified n2 = staged("kernel norm", [&] { return kernel_inner(space, spec, spec, job.eps); });
    d["norm_sq"] = n2.value.real();
    d["norm_sq_error"] = n2.error;
  }
  try {
    const TruncSeries s = kernel_series(space, spec, job.eps);
    d["envelope"] = {{"length", s.size()},
                     {"scale", s.tail().scale},
                     {"ratio", s.tail().ratio},
                     {"decay", s.tail().decay}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::cannot_certify) throw StageError("kernel series", e);
    d["envelope"] = nullptr;
    d["envelope_note"] = e.what();
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v + 0.0);  // + 0.0 turns -0 into 0
  return buf;
}

}  // namespace

StageError::StageError(std::string stage, const Error& cause)
    : Error(preformatted_t{}, cause.code(), "stage '" + stage + "': " + cause.what()), stage_(std::move(stage)) {}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::approximate: return "approximate";
    case Command::stabilize: return "stabilize";
    case Command::project: return "project";
    case Command::diagnose: return "diagnose";
    case Command::kernel: return "kernel";
  }
  return "approximate";
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

std::string_view to_string(KernelFlavor f) {
  return f == KernelFlavor::derivative_of_kernel ? "derivative_of_kernel" : "kernel_for_derivatives";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::undecidable: return "undecidable";
  }
  return "undecidable";
}

Command parse_command(std::string_view s) {
  for (Command c : {Command::approximate, Command::stabilize, Command::project, Command::diagnose, Command::kernel})
    if (to_string(c) == s) return c;
  bad("unknown command '" + std::string(s) + "'");
}

OutputFormat parse_format(std::string_view s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  bad("unknown format '" + std::string(s) + "'");
}

KernelFlavor parse_flavor(std::string_view s) {
  if (s == "kernel_for_derivatives") return KernelFlavor::kernel_for_derivatives;
  if (s == "derivative_of_kernel") return KernelFlavor::derivative_of_kernel;
  bad("unknown kernel flavor '" + std::string(s) + "'");
}

cplx parse_complex(const json& j) {
  if (j.is_number()) return {number(j, "coefficient"), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], "real part"), number(j[1], "imaginary part")};
  bad("complex numbers are [re, im] or a plain number");
}

std::vector<cplx> parse_coeffs(const json& j) {
  if (!j.is_array() || j.empty()) bad("coefficient lists must be nonempty arrays");
  std::vector<cplx> c;
  for (const json& e : j) c.push_back(parse_complex(e));
  return c;
}

ordered_json complex_json(cplx z) { return ordered_json::array({z.real() + 0.0, z.imag() + 0.0}); }

ordered_json coeffs_json(std::span<const cplx> c) {
  ordered_json a = ordered_json::array();
  for (const cplx& z : c) a.push_back(complex_json(z));
  return a;
}

SpaceSpec parse_space(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) bad("space descriptor needs a string 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  SpaceSpec s;
  if (kind == "dirichlet" || kind == "hardy") {
    reject_unknown(j, {"kind", "alpha"}, "space");
    s.kind = WeightKind::dirichlet;
    s.alpha = j.contains("alpha") ? number(j["alpha"], "alpha") : 0.0;
    if (kind == "hardy" && s.alpha != 0.0) bad("hardy space has alpha = 0");
  } else if (kind == "custom") {
    reject_unknown(j, {"kind", "weights", "extension"}, "space");
    s.kind = WeightKind::custom;
    if (!j.contains("weights") || !j["weights"].is_array() || j["weights"].empty()) bad("custom space needs 'weights'");
    for (const json& w : j["weights"]) s.weights.push_back(number(w, "weight"));
    const std::string ext = j.value("extension", std::string("ratio"));
    if (ext == "ratio")
      s.extension = Extension::ratio;
    else if (ext == "constant")
      s.extension = Extension::constant;
    else
      bad("extension must be 'ratio' or 'constant'");
  } else if (kind == "multiplier") {
    reject_unknown(j, {"kind", "m"}, "space");
    s.kind = WeightKind::multiplier;
    if (!j.contains("m")) bad("multiplier space needs 'm'");
    s.m = trim(parse_coeffs(j["m"]));
  } else {
    bad("unknown space kind '" + kind + "'");
  }
  return s;
}

ordered_json space_json(const SpaceSpec& s) {
  ordered_json j;
  j["kind"] = kind_name(s.kind);
  switch (s.kind) {
    case WeightKind::dirichlet:
      j["alpha"] = s.alpha;
      break;
    case WeightKind::custom:
      j["weights"] = s.weights;
      j["extension"] = extension_name(s.extension);
      break;
    case WeightKind::multiplier:
      j["m"] = coeffs_json(s.m);
      break;
  }
  return j;
}

FunctionSpec parse_function(const json& j) {
  FunctionSpec f;
  if (j.is_array()) {
    f.num = trim(parse_coeffs(j));
    return f;
  }
  if (j.is_object()) {
    reject_unknown(j, {"num", "den"}, "function");
    if (!j.contains("num")) bad("rational function needs 'num'");
    f.num = trim(parse_coeffs(j["num"]));
    if (j.contains("den")) f.den = trim(parse_coeffs(j["den"]));
    return f;
  }
  bad("functions are coefficient arrays or {\"num\": ..., \"den\": ...}");
}

ordered_json function_json(const FunctionSpec& f) {
  if (!f.den) return coeffs_json(f.num);
  return ordered_json{{"num", coeffs_json(f.num)}, {"den", coeffs_json(*f.den)}};
}

JobSpec parse_job(const json& j) {
  if (!j.is_object()) bad("job must be a JSON object");
  reject_unknown(j, {"command", "space", "f", "g", "n_max", "eps", "format", "taylor", "kernel"}, "job");
  JobSpec job;
  if (j.contains("command")) {
    if (!j["command"].is_string()) bad("command must be a string");
    job.command = parse_command(j["command"].get<std::string>());
  }
  if (j.contains("space")) job.space = parse_space(j["space"]);
  if (j.contains("f")) job.f = parse_function(j["f"]);
  if (j.contains("g")) job.g = parse_function(j["g"]);
  if (j.contains("n_max")) job.n_max = index_value(j["n_max"], "n_max");
  if (j.contains("eps")) {
    job.eps = number(j["eps"], "eps");
    if (!(job.eps > 0.0)) bad("eps must be positive");
  }
  if (j.contains("format")) {
    if (!j["format"].is_string()) bad("format must be a string");
    job.format = parse_format(j["format"].get<std::string>());
  }
  if (j.contains("taylor")) {
    if (!j["taylor"].is_boolean()) bad("taylor must be a boolean");
    job.taylor = j["taylor"].get<bool>();
  }
  if (j.contains("kernel")) {
    const json& k = j["kernel"];
    if (!k.is_object()) bad("kernel must be an object");
    reject_unknown(k, {"beta", "order", "flavor", "k_max"}, "kernel");
    if (k.contains("beta")) job.kernel.beta = parse_complex(k["beta"]);
    if (k.contains("order")) job.kernel.order = static_cast<unsigned>(index_value(k["order"], "order"));
    if (k.contains("flavor")) {
      if (!k["flavor"].is_string()) bad("flavor must be a string");
      job.kernel.flavor = parse_flavor(k["flavor"].get<std::string>());
    }
    if (k.contains("k_max")) job.kernel.k_max = index_value(k["k_max"], "k_max");
  }
  return job;
}

ordered_json serialize_job(const JobSpec& job) {
  ordered_json j;
  j["command"] = to_string(job.command);
  j["space"] = space_json(job.space);
  j["f"] = function_json(job.f);
  j["g"] = function_json(job.g);
  j["n_max"] = job.n_max;
  j["eps"] = job.eps;
  j["format"] = to_string(job.format);
  j["taylor"] = job.taylor;
  j["kernel"] = {{"beta", complex_json(job.kernel.beta)},
                 {"order", job.kernel.order},
                 {"flavor", to_string(job.kernel.flavor)},
                 {"k_max", job.kernel.k_max}};
  return j;
}

WeightSequence make_space(const SpaceSpec& s) {
  switch (s.kind) {
    case WeightKind::dirichlet: return WeightSequence::dirichlet(s.alpha);
    case WeightKind::custom: return WeightSequence::custom(s.weights, s.extension);
    case WeightKind::multiplier: return WeightSequence::multiplier(CPoly(s.m));
  }
  bad("unknown space kind");
}

Element make_element(const FunctionSpec& f) {
  if (!f.den) return CPoly(f.num);
  const CPoly den(*f.den);
  if (den.degree() < 1) {
    if (den.is_zero()) bad("denominator must be nonzero");
    return CPoly(f.num) * (1.0 / den[0]);
  }
  return TruncSeries::rational(CPoly(f.num), den);
}

JobOutput run_job(const JobSpec& job, unsigned threads) {
  switch (job.command) {
    case Command::approximate: return run_approximate(job, threads);
    case Command::stabilize: return run_stabilize(job, threads);
    case Command::project: return run_project(job, threads);
    case Command::diagnose: return run_diagnose(job, threads);
    case Command::kernel: return run_kernel(job);
  }
  bad("unknown command");
}

std::string render(const JobOutput& out, OutputFormat format) {
  if (format == OutputFormat::json) return out.data.dump(2) + "\n";
  std::ostringstream s;
  for (std::size_t i = 0; i < out.csv_header.size(); ++i) s << (i ? "," : "") << out.csv_header[i];
  s << "\n";
  for (const auto& row : out.csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << format_double(row[i]);
    s << "\n";
  }
  return s.str();
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::orthogonal_data: return 2;
    case ErrorCode::not_positive_definite:
    case ErrorCode::no_convergence:
    case ErrorCode::ill_conditioned: return 3;
    case ErrorCode::undecidable: return 4;
    default: return 1;
  }
}

}  // namespace opa
