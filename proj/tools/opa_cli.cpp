// opa: batch front end for optimal polynomial approximants and projections.
//
//   opa approximate --space '{"kind":"dirichlet","alpha":1}' --f '[1,-1]' --n-max 10
//   opa project --job job.json --format csv --out phi.csv
//
// Data goes to stdout (or --out), diagnostics to stderr.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "opa/jobs.hpp"

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw opa::Error(opa::ErrorCode::invalid_argument, "cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Inline JSON when it looks like JSON, otherwise a file path.
json json_arg(const std::string& text, const char* what) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  const bool inline_json = first != std::string::npos && std::string("[{-0123456789.").find(text[first]) != std::string::npos;
  try {
    return json::parse(inline_json ? text : slurp(text));
  } catch (const json::parse_error& e) {
    throw opa::Error(opa::ErrorCode::invalid_argument, std::string("malformed JSON for ") + what + ": " + e.what());
  }
}

unsigned threads_from_env() {
  const char* v = std::getenv("OPA_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) {
    std::cerr << "opa: ignoring OPA_THREADS='" << v << "'\n";
    return 1;
  }
  return static_cast<unsigned>(n);
}

struct Flags {
  std::string job, space, f, g, format, out, beta, flavor;
  std::optional<std::size_t> n_max, k_max;
  std::optional<double> eps;
  std::optional<unsigned> order;
  bool taylor = false;
};

void add_common(CLI::App* cmd, Flags& fl) {
  cmd->add_option("--job", fl.job, "job file (JSON); flags override its fields");
  cmd->add_option("--space", fl.space, "space descriptor: inline JSON or file");
  cmd->add_option("--f", fl.f, "f: coefficient array or {\"num\":[..],\"den\":[..]}");
  cmd->add_option("--g", fl.g, "g (default 1)");
  cmd->add_option("--n-max", fl.n_max, "largest approximant degree");
  cmd->add_option("--eps", fl.eps, "tolerance");
  cmd->add_option("--format", fl.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", fl.out, "output file (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal polynomial approximants in weighted Hardy spaces"};
  app.require_subcommand(1);
  Flags fl;

  CLI::App* approximate = app.add_subcommand("approximate", "approximants p_n* for n = 0..n_max");
  add_common(approximate, fl);
  approximate->add_flag("--taylor", fl.taylor, "add the Taylor truncation residual column");
  CLI::App* stabilize = app.add_subcommand("stabilize", "detect and certify stabilization");
  add_common(stabilize, fl);
  CLI::App* project = app.add_subcommand("project", "projection of 1 onto [f] with oracle checks");
  add_common(project, fl);
  CLI::App* diagnose = app.add_subcommand("diagnose", "cyclicity diagnostic table");
  add_common(diagnose, fl);
  CLI::App* kernel = app.add_subcommand("kernel", "reproducing kernel coefficients");
  add_common(kernel, fl);
  kernel->add_option("--beta", fl.beta, "point, as a number or [re, im]");
  kernel->add_option("--order", fl.order, "derivative order");
  kernel->add_option("--flavor", fl.flavor, "kernel_for_derivatives or derivative_of_kernel");
  kernel->add_option("--k-max", fl.k_max, "number of coefficients minus one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    json j = fl.job.empty() ? json::object() : json_arg(fl.job, "--job");
    if (!j.is_object()) throw opa::Error(opa::ErrorCode::invalid_argument, "job must be a JSON object");
    j["command"] = app.get_subcommands().front()->get_name();
    if (!fl.space.empty()) j["space"] = json_arg(fl.space, "--space");
    if (!fl.f.empty()) j["f"] = json_arg(fl.f, "--f");
    if (!fl.g.empty()) j["g"] = json_arg(fl.g, "--g");
    if (fl.n_max) j["n_max"] = *fl.n_max;
    if (fl.eps) j["eps"] = *fl.eps;
    if (!fl.format.empty()) j["format"] = fl.format;
    if (fl.taylor) j["taylor"] = true;
    if (!fl.beta.empty() || fl.order || !fl.flavor.empty() || fl.k_max) {
      json& k = j["kernel"];
      if (k.is_null()) k = json::object();
      if (!fl.beta.empty()) k["beta"] = json_arg(fl.beta, "--beta");
      if (fl.order) k["order"] = *fl.order;
      if (!fl.flavor.empty()) k["flavor"] = fl.flavor;
      if (fl.k_max) k["k_max"] = *fl.k_max;
    }

    const opa::JobSpec job = opa::parse_job(j);
    const opa::JobOutput result = opa::run_job(job, threads_from_env());
    const std::string text = opa::render(result, job.format);
    if (fl.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(fl.out, std::ios::binary);
      if (!(out << text)) throw opa::Error(opa::ErrorCode::invalid_argument, "cannot write '" + fl.out + "'");
    }
    return 0;
  } catch (const opa::Error& e) {
    std::cerr << "opa: " << e.what() << "\n";
    return opa::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "opa: " << e.what() << "\n";
    return 1;
  }
}
