#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qpois/quasi.hpp"

namespace qp::cli {

using json = nlohmann::json;

struct GroupSpec {
  std::string family = "SL";  // SL, GL, product (sl2 + abelian), abelian
  int n = 2;
  int abelian = 0;
};

struct PairingSpec {
  double scale = 1.0;
  std::vector<bool> mask;  // basis directions carrying the form; empty = all
  std::optional<MatC> upper;
  std::optional<MatC> lower;
};

struct SiteSpec {
  int genus = 1;
  std::vector<MatC> classes;
  SurfaceVariant variant = SurfaceVariant::Classes;
};

struct Tolerances {
  double exact = 1e-10;
  double law = 1e-9;
  double jacobi = 1e-7;
  double closed = 1e-7;
  double duality = 1e-8;
  double solver = 1e-10;
};

struct RunConfig {
  GroupSpec group;
  PairingSpec pairing;
  SiteSpec site;
  std::vector<std::pair<std::string, std::string>> words;
  std::vector<MatC> targets;  // empty: identity
  std::uint64_t seed = 1;
  int samples = 16;
  int max_iters = 200;
  Tolerances tol;
  json echo;
};

RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);
MatC parse_matrix(const json& j, const std::string& where);
json matrix_json(const MatC& m);

enum class Status { Pass, Fail, Skipped, Refused };
std::string to_string(Status s);

struct Check {
  std::string name;
  std::string anchor;
  double residual = 0.0;
  double tolerance = 0.0;
  Status status = Status::Pass;
  int samples = 0;
  std::uint64_t seed = 0;
  std::string reason;
};

struct Report {
  std::string command;
  std::string suite;
  std::uint64_t seed = 0;
  json config;
  std::vector<Check> checks;
  json rows;  // bracket / sample tables
  bool overall_pass() const;
  json to_json() const;
};

// Canonical text: sorted keys, doubles with 17 significant digits.
std::string canonical_dump(const json& j);
void write_report(const Report& r, const std::string& path);

Report run_suite(const RunConfig& cfg, const std::string& suite, int jobs);
Report compute_brackets(const RunConfig& cfg, int jobs);
Report sample_reps(const RunConfig& cfg, int jobs);

int main_entry(int argc, char** argv);

}  // namespace qp::cli
