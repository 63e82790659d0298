#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "opa/element.hpp"
#include "opa/error.hpp"
#include "opa/space.hpp"

namespace opa {

using ordered_json = nlohmann::ordered_json;

enum class Command { approximate, stabilize, project, diagnose, kernel };
enum class OutputFormat { json, csv };

struct SpaceSpec {
  WeightKind kind = WeightKind::dirichlet;
  double alpha = 0.0;
  std::vector<double> weights;
  Extension extension = Extension::ratio;
  std::vector<cplx> m;
};

/// A polynomial, or num/den when den is present.
struct FunctionSpec {
  std::vector<cplx> num{1.0};
  std::optional<std::vector<cplx>> den;
};

struct KernelJob {
  cplx beta{};
  unsigned order = 0;
  KernelFlavor flavor = KernelFlavor::kernel_for_derivatives;
  std::size_t k_max = 20;
};

struct JobSpec {
  Command command = Command::approximate;
  SpaceSpec space;
  FunctionSpec f;
  FunctionSpec g;
  std::size_t n_max = 10;
  double eps = 1e-8;
  OutputFormat format = OutputFormat::json;
  bool taylor = false;
  KernelJob kernel;
};

/// An Error annotated with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

std::string_view to_string(Command c);
std::string_view to_string(OutputFormat f);
std::string_view to_string(KernelFlavor f);
std::string_view to_string(Verdict v);
Command parse_command(std::string_view s);
OutputFormat parse_format(std::string_view s);
KernelFlavor parse_flavor(std::string_view s);

/// Complex numbers are [re, im]; plain numbers are read as real.
cplx parse_complex(const nlohmann::json& j);
std::vector<cplx> parse_coeffs(const nlohmann::json& j);
ordered_json complex_json(cplx z);
ordered_json coeffs_json(std::span<const cplx> c);

SpaceSpec parse_space(const nlohmann::json& j);
ordered_json space_json(const SpaceSpec& s);
FunctionSpec parse_function(const nlohmann::json& j);
ordered_json function_json(const FunctionSpec& f);

/// Missing fields take their defaults; unknown fields are rejected.
JobSpec parse_job(const nlohmann::json& j);
/// Canonical form: every field present, fixed order.
ordered_json serialize_job(const JobSpec& job);

WeightSequence make_space(const SpaceSpec& s);
Element make_element(const FunctionSpec& f);

struct JobOutput {
  ordered_json data;
  std::vector<std::string> csv_header;
  std::vector<std::vector<double>> csv_rows;
};

/// Runs the job; threads > 1 parallelizes independent solves.
JobOutput run_job(const JobSpec& job, unsigned threads = 1);

/// Shortest round-trip JSON, or CSV with 17 significant digits.
std::string render(const JobOutput& out, OutputFormat format);

/// Process exit code for an error: 2 orthogonal data, 3 solver failure,
/// 4 undecidable, 1 otherwise.
int exit_code_for(ErrorCode code);

}  // namespace opa
