#include <fstream>
#include <set>

#include "qpois/cli.hpp"

namespace qp::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigError, where + ": " + what);
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(where + "." + it.key(), "unknown key");
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

cd parse_entry(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(where, "matrix entry must be a number or [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

MatC parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "matrix must be a non-empty array of rows");
  const size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) fail(where + "[0]", "row must be a non-empty array");
  const size_t cols = j[0].size();
  MatC m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) fail(rw, "rows must have equal length");
    for (size_t c = 0; c < cols; ++c) m(r, c) = parse_entry(j[r][c], rw + "[" + std::to_string(c) + "]");
  }
  return m;
}

json matrix_json(const MatC& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(row);
  }
  return rows;
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  check_keys(j, "config",
             {"schema_version", "group", "pairing", "site", "words", "targets", "seed", "samples", "max_iters",
              "tolerances"});
  c.echo = j;
  if (j.contains("schema_version") && get_int(j["schema_version"], "config.schema_version") != 1)
    fail("config.schema_version", "only version 1 is understood");
  if (j.contains("group")) {
    const json& g = j["group"];
    check_keys(g, "group", {"family", "n", "abelian"});
    if (g.contains("family")) {
      if (!g["family"].is_string()) fail("group.family", "expected a string");
      c.group.family = g["family"].get<std::string>();
    }
    if (g.contains("n")) c.group.n = get_int(g["n"], "group.n");
    if (g.contains("abelian")) c.group.abelian = get_int(g["abelian"], "group.abelian");
    const std::set<std::string> fams{"SL", "GL", "product", "abelian"};
    if (!fams.count(c.group.family)) fail("group.family", "must be one of SL, GL, product, abelian");
    if (c.group.family == "product") {
      c.group.n = 2 + c.group.abelian;
      if (c.group.abelian < 1) fail("group.abelian", "product family needs at least one abelian direction");
    }
    if (c.group.n < 1 || (c.group.family == "SL" && c.group.n < 2)) fail("group.n", "matrix size too small");
  }
  if (j.contains("pairing")) {
    const json& p = j["pairing"];
    check_keys(p, "pairing", {"scale", "mask", "upper", "lower"});
    if (p.contains("scale")) c.pairing.scale = get_number(p["scale"], "pairing.scale");
    if (p.contains("mask")) {
      if (!p["mask"].is_array()) fail("pairing.mask", "expected an array of booleans");
      for (size_t i = 0; i < p["mask"].size(); ++i) {
        if (!p["mask"][i].is_boolean()) fail("pairing.mask[" + std::to_string(i) + "]", "expected a boolean");
        c.pairing.mask.push_back(p["mask"][i].get<bool>());
      }
    }
    if (p.contains("upper")) c.pairing.upper = parse_matrix(p["upper"], "pairing.upper");
    if (p.contains("lower")) c.pairing.lower = parse_matrix(p["lower"], "pairing.lower");
  }
  if (j.contains("site")) {
    const json& s = j["site"];
    check_keys(s, "site", {"genus", "classes", "variant"});
    if (s.contains("genus")) c.site.genus = get_int(s["genus"], "site.genus");
    if (s.contains("classes")) {
      if (!s["classes"].is_array()) fail("site.classes", "expected an array of matrices");
      for (size_t i = 0; i < s["classes"].size(); ++i) {
        const std::string w = "site.classes[" + std::to_string(i) + "]";
        MatC m = parse_matrix(s["classes"][i], w);
        if (m.rows() != c.group.n || m.cols() != c.group.n) fail(w, "shape does not match group.n");
        c.site.classes.push_back(m);
      }
    }
    if (s.contains("variant")) {
      if (!s["variant"].is_string()) fail("site.variant", "expected a string");
      std::string v = s["variant"].get<std::string>();
      if (v == "classes")
        c.site.variant = SurfaceVariant::Classes;
      else if (v == "full")
        c.site.variant = SurfaceVariant::FullGroups;
      else
        fail("site.variant", "must be 'classes' or 'full'");
    }
    if (c.site.genus < 0 || (c.site.genus == 0 && c.site.classes.size() < 3))
      fail("site", "signature needs genus >= 1 or at least three classes");
  }
  if (j.contains("words")) {
    if (!j["words"].is_array()) fail("words", "expected an array of [u, v] pairs");
    for (size_t i = 0; i < j["words"].size(); ++i) {
      const json& w = j["words"][i];
      const std::string where = "words[" + std::to_string(i) + "]";
      if (!w.is_array() || w.size() != 2 || !w[0].is_string() || !w[1].is_string())
        fail(where, "expected a pair of word strings");
      c.words.emplace_back(w[0].get<std::string>(), w[1].get<std::string>());
    }
  }
  if (j.contains("targets")) {
    if (!j["targets"].is_array()) fail("targets", "expected an array of matrices");
    for (size_t i = 0; i < j["targets"].size(); ++i) {
      const std::string w = "targets[" + std::to_string(i) + "]";
      MatC m = parse_matrix(j["targets"][i], w);
      if (m.rows() != c.group.n || m.cols() != c.group.n) fail(w, "shape does not match group.n");
      c.targets.push_back(m);
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) fail("seed", "expected an integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("samples")) c.samples = get_int(j["samples"], "samples");
  if (c.samples < 1) fail("samples", "must be positive");
  if (j.contains("max_iters")) c.max_iters = get_int(j["max_iters"], "max_iters");
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    check_keys(t, "tolerances", {"exact", "law", "jacobi", "closed", "duality", "solver"});
    auto rd = [&](const char* k, double& dst) {
      if (t.contains(k)) dst = get_number(t[k], std::string("tolerances.") + k);
    };
    rd("exact", c.tol.exact);
    rd("law", c.tol.law);
    rd("jacobi", c.tol.jacobi);
    rd("closed", c.tol.closed);
    rd("duality", c.tol.duality);
    rd("solver", c.tol.solver);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace qp::cli
