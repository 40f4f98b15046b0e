#include <cmath>
#include <cstdio>
#include <fstream>

#include "qpois/cli.hpp"

namespace qp::cli {

std::string to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Skipped: return "skipped";
    case Status::Refused: return "refused";
  }
  return "unknown";
}

bool Report::overall_pass() const {
  for (const auto& c : checks)
    if (c.status == Status::Fail) return false;
  return true;
}

json Report::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["suite"] = suite;
  j["seed"] = seed;
  j["config"] = config;
  j["environment"] = {{"tool", "qpois"}, {"version", "0.1.0"}, {"scalar", "complex<double>"}};
  json cs = json::array();
  int passed = 0, failed = 0, skipped = 0, refused = 0;
  for (const auto& c : checks) {
    json e;
    e["name"] = c.name;
    e["anchor"] = c.anchor;
    e["max_residual"] = c.residual;
    e["tolerance"] = c.tolerance;
    e["status"] = to_string(c.status);
    e["samples"] = c.samples;
    e["seed"] = c.seed;
    if (!c.reason.empty()) e["reason"] = c.reason;
    cs.push_back(e);
    switch (c.status) {
      case Status::Pass: ++passed; break;
      case Status::Fail: ++failed; break;
      case Status::Skipped: ++skipped; break;
      case Status::Refused: ++refused; break;
    }
  }
  j["checks"] = cs;
  j["summary"] = {{"total", checks.size()}, {"passed", passed},    {"failed", failed},
                  {"skipped", skipped},     {"refused", refused},  {"overall_pass", overall_pass()},
                  {"empty", checks.empty() && rows.empty()}};
  if (!rows.is_null()) j["rows"] = rows;
  return j;
}

namespace {
void dump(const json& j, std::string& out, int indent) {
  const std::string pad(indent * 2, ' '), pad_in((indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map order: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += pad_in + json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad_in;
        dump(j[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      double v = j.get<double>();
      if (std::isnan(v)) {
        out += "\"nan\"";
      } else if (std::isinf(v)) {
        out += v > 0 ? "\"inf\"" : "\"-inf\"";
      } else {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
      }
      return;
    }
    default:
      out += j.dump();
  }
}
}  // namespace

std::string canonical_dump(const json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

void write_report(const Report& r, const std::string& path) {
  std::string text = canonical_dump(r.to_json());
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write report " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace qp::cli
