#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qpois/cli.hpp"
#include "support.hpp"

using namespace qpt;
using namespace qp::cli;

namespace {

const std::string kConfigs = QPOIS_CONFIG_DIR;

json sl2_config() {
  return json::parse(R"({"group": {"family": "SL", "n": 2}, "site": {"genus": 1, "variant": "full"},
                         "words": [["x1", "y1"]], "seed": 4, "samples": 3})");
}

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "config accepted";
  return {};
}

const Check* find(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qpois");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(Config, ErrorsCarryLocations) {
  json j = sl2_config();
  j["group"]["family"] = "SO";
  EXPECT_NE(config_error(j).find("group.family"), std::string::npos);
  j = sl2_config();
  j["site"]["colour"] = 1;
  EXPECT_NE(config_error(j).find("site.colour"), std::string::npos);
  j = sl2_config();
  j["targets"] = json::parse("[[[1, 0], [0, 1]], [[1, 0, 0]]]");
  EXPECT_NE(config_error(j).find("targets[1]"), std::string::npos);
  j = sl2_config();
  j["words"] = json::parse(R"([["x1"]])");
  EXPECT_NE(config_error(j).find("words[0]"), std::string::npos);
  j = sl2_config();
  j["site"]["genus"] = 0;
  EXPECT_NE(config_error(j).find("site"), std::string::npos);
  j = sl2_config();
  j["samples"] = 0;
  EXPECT_NE(config_error(j).find("samples"), std::string::npos);
  try {
    load_config(kConfigs + "/does-not-exist.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Config, MatricesAndDefaults) {
  MatC m = parse_matrix(json::parse("[[1, [0, 2]], [-1.5, 0]]"), "m");
  EXPECT_EQ(m(0, 1), cd(0, 2));
  EXPECT_EQ(m(1, 0), cd(-1.5, 0));
  EXPECT_EQ(parse_matrix(matrix_json(m), "m"), m);
  RunConfig c = parse_config(json::object());
  EXPECT_EQ(c.group.family, "SL");
  EXPECT_EQ(c.group.n, 2);
  EXPECT_EQ(c.samples, 16);
  EXPECT_EQ(c.max_iters, 200);
  for (const char* f : {"sl2.json", "sl2_torus.json", "degenerate.json", "abelian.json", "nonvariant.json"})
    EXPECT_NO_THROW(load_config(kConfigs + "/" + f)) << f;
}

TEST(Report, CanonicalDump) {
  json j = {{"b", 0.1}, {"a", {{"z", 1}, {"y", 2}}}};
  std::string s = canonical_dump(j);
  EXPECT_LT(s.find("\"a\""), s.find("\"b\""));
  EXPECT_LT(s.find("\"y\""), s.find("\"z\""));
  EXPECT_NE(s.find("0.10000000000000001"), std::string::npos);
  EXPECT_EQ(json::parse(s)["b"].get<double>(), 0.1);
}

TEST(Report, EmptySuite) {
  Report r = run_suite(parse_config(sl2_config()), "empty", 1);
  json j = r.to_json();
  EXPECT_TRUE(j["summary"]["empty"].get<bool>());
  EXPECT_TRUE(j["summary"]["overall_pass"].get<bool>());
  EXPECT_TRUE(r.checks.empty());
  try {
    run_suite(parse_config(sl2_config()), "everything", 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(Bracket, ZeroCases) {
  json j = sl2_config();
  j["words"] = json::parse(R"([["x1", "x1"], ["x1 y1", "x1 y1"]])");
  Report r = compute_brackets(parse_config(j), 1);
  ASSERT_EQ(r.rows.size(), 2u * 3u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row["status"], "ok");
    EXPECT_LE(std::abs(row["value"][0].get<double>()) + std::abs(row["value"][1].get<double>()), 1e-12);
  }
  json a = json::parse(R"({"group": {"family": "abelian", "n": 2}, "site": {"genus": 1, "variant": "full"},
                          "words": [["x1", "x1 x1"], ["x1 y1", "y1^-1 x1^-1"]], "seed": 2, "samples": 2})");
  // words commuting in the surface group; tr x1 and tr y1 themselves do not Poisson-commute here
  for (const auto& row : compute_brackets(parse_config(a), 1).rows) {
    EXPECT_EQ(row["status"], "ok");
    EXPECT_LE(std::abs(row["value"][0].get<double>()) + std::abs(row["value"][1].get<double>()), 1e-12);
  }
}

TEST(Bracket, NonzeroAndSampled) {
  Report r = compute_brackets(parse_config(sl2_config()), 2);
  double worst = 0.0;
  for (const auto& row : r.rows) {
    EXPECT_EQ(row["status"], "ok");
    EXPECT_LE(row["residual"].get<double>(), 1e-10);
    worst = std::max(worst, std::abs(row["value"][0].get<double>()) + std::abs(row["value"][1].get<double>()));
  }
  EXPECT_GT(worst, 1e-3);
  Report s = sample_reps(parse_config(sl2_config()), 2);
  EXPECT_EQ(s.rows.size(), 3u);
}

TEST(Suites, NonInvariantPairing) {
  Report r = run_suite(load_config(kConfigs + "/nonvariant.json"), "all", 2);
  ASSERT_NE(find(r, "pairing.ad_invariance.upper"), nullptr);
  EXPECT_EQ(find(r, "pairing.ad_invariance.upper")->status, Status::Fail);
  EXPECT_FALSE(r.overall_pass());
  int skipped = 0, refused = 0;
  for (const auto& c : r.checks) {
    if (c.status == Status::Skipped) {
      ++skipped;
      EXPECT_FALSE(c.reason.empty());
    }
    refused += c.status == Status::Refused;
  }
  EXPECT_GT(skipped, 0);
  EXPECT_GT(refused, 0);
}

TEST(Suites, DegenerateRefusals) {
  RunConfig cfg = load_config(kConfigs + "/degenerate.json");
  for (const char* suite : {"duality", "dirac"}) {
    Report r = run_suite(cfg, suite, 1);
    ASSERT_FALSE(r.checks.empty());
    for (const auto& c : r.checks) {
      EXPECT_EQ(c.status, Status::Refused) << c.name;
      EXPECT_NE(c.reason.find("DegeneratePairing"), std::string::npos);
    }
  }
  Report core = run_suite(cfg, "core", 1);
  EXPECT_TRUE(core.overall_pass());
  EXPECT_EQ(find(core, "pairing.psi_inverse")->status, Status::Skipped);
}

TEST(Suites, DeterministicAcrossRunsAndJobs) {
  RunConfig cfg = load_config(kConfigs + "/sl2.json");
  cfg.samples = 4;
  std::string a = canonical_dump(run_suite(cfg, "all", 1).to_json());
  std::string b = canonical_dump(run_suite(cfg, "all", 1).to_json());
  std::string c = canonical_dump(run_suite(cfg, "all", 4).to_json());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  RunConfig other = cfg;
  other.seed += 1;
  EXPECT_NE(a, canonical_dump(run_suite(other, "all", 1).to_json()));
}

TEST(Entry, ExitCodes) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "qpois_cli_test";
  fs::create_directories(dir);
  std::string out = (dir / "r.json").string();
  EXPECT_EQ(run_cli({"verify", "core", "--config", kConfigs + "/degenerate.json", "--out", out}), 0);
  EXPECT_TRUE(json::parse(slurp(out))["summary"]["overall_pass"].get<bool>());
  EXPECT_EQ(run_cli({"verify", "core", "--config", kConfigs + "/nonvariant.json", "--out", out}), 1);
  EXPECT_FALSE(json::parse(slurp(out))["summary"]["overall_pass"].get<bool>());
  std::ofstream((dir / "bad.json").string()) << R"({"group": {"family": 3}})";
  EXPECT_EQ(run_cli({"verify", "core", "--config", (dir / "bad.json").string(), "--out", out}), 2);
  EXPECT_EQ(run_cli({"bracket", "--config", kConfigs + "/sl2_torus.json", "--seed", "3", "--out", out}), 0);
  EXPECT_EQ(json::parse(slurp(out))["seed"].get<std::uint64_t>(), 3u);
  fs::remove_all(dir);
}
