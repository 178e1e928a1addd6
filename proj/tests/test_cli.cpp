#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "foliata/cli.hpp"

using namespace foliata;
using foliata::io::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "foliata");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("foliata_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::filesystem::path dir_;
};

}  // namespace

TEST(Cli, ClassifyLabelsAndExitCodes) {
  struct Case {
    std::vector<std::string> args;
    const char* label;
    int code;
  };
  for (const Case& cs : {Case{{"--c0", "1", "--c", "0", "--d", "-0.5"}, "OnduloidRotational", 0},
                         Case{{"--c0", "1", "--c", "-1", "--d", "0"}, "HelicoidS2", 0},
                         Case{{"--c0", "-1", "--c", "-1", "--d", "1"}, "AnnulusFamily", 0},
                         Case{{"--c0", "-1", "--c", "1", "--d", "-1"}, "OndulatedHelicoid", 0},
                         Case{{"--c0", "-1", "--c", "-1", "--d", "-1"}, "RiemannFamilyH2", 0},
                         Case{{"--c0", "-1", "--c", "1", "--d", "1"}, "OutsideModuli", 1}}) {
    std::vector<std::string> args{"classify"};
    args.insert(args.end(), cs.args.begin(), cs.args.end());
    const Result r = run(args);
    EXPECT_EQ(r.code, cs.code) << cs.label;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("label"), cs.label);
    EXPECT_FALSE(j.at("certificate").empty());
    EXPECT_EQ(j.at("config").at("subcommand"), "classify");
    EXPECT_EQ(j.at("version"), io::kVersion);
  }
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"classify", "--bogus"}).code, 2);
  EXPECT_EQ(run({"classify", "--c0", "1"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"profile", "--c0", "1", "--c", "-1", "--d", "0", "--kind", "h"}).code, 2);
  EXPECT_EQ(run({"field", "--c0", "1", "--c", "-1", "--d", "0", "--nx", "3"}).code, 2);
  const Result help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("classify"), std::string::npos);
  const Result v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, std::string(io::kVersion) + "\n");
}

TEST(Cli, DomainErrorsExitOne) {
  // No real solution for g.
  const Result r = run({"profile", "--c0", "-1", "--c", "3", "--d", "0.5", "--kind", "g"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error"), std::string::npos);
  EXPECT_EQ(run({"verify", "--field", "/nonexistent/field.json"}).code, 1);
}

TEST(Cli, ScanCsv) {
  const Result r = run({"scan", "--c0", "-1", "--nx", "4", "--ny", "3"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "c,d,label");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 12u);
  EXPECT_EQ(run({"scan", "--c0", "-1", "--nx", "4", "--ny", "3"}).out, r.out);
}

TEST_F(CliFiles, ProfileWritesCsvAndSidecar) {
  const Result r = run({"profile", "--c0", "1", "--c", "-1", "--d", "0", "--range", "0", "12", "--out", path("f.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(path("f.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "x,f,f_x");
  std::getline(csv, line);
  EXPECT_EQ(line, "0.0,0.0,1.0");
  const json side = json::parse(slurp(path("f.csv.json")));
  EXPECT_NEAR(side.at("period").get<double>(), 5.24412, 1e-5);
  EXPECT_LE(side.at("first_integral_drift").get<double>(), 1e-9);
  EXPECT_EQ(side.at("config").at("kind"), "f");
  EXPECT_EQ(side.at("version"), io::kVersion);
}

TEST_F(CliFiles, FieldVerifyRoundTrip) {
  const std::vector<std::string> field{"field", "--c0",  "1",   "--c", "-1", "--d", "-1", "--domain",
                                       "0",     "1",     "0",   "1",   "--nx", "51", "--ny", "51"};
  auto with_out = [&](const std::string& p) {
    auto a = field;
    a.insert(a.end(), {"--out", p});
    return a;
  };
  ASSERT_EQ(run(with_out(path("a.json"))).code, 0);
  ASSERT_EQ(run(with_out(path("b.json"))).code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));

  const json fj = json::parse(slurp(path("a.json")));
  EXPECT_EQ(fj.at("omega").size(), 51u * 51u);
  EXPECT_EQ(fj.at("config").at("subcommand"), "field");

  // Shortest round-trip numbers: the file reproduces omega bit for bit.
  std::ifstream in(path("a.json"));
  const OmegaField back = io::read_field(in);
  const OmegaField direct = build_field(io::field_request_from(fj.at("config")));
  EXPECT_EQ(back.omega.data, direct.omega.data);
  ASSERT_TRUE(back.source);

  const Result v = run({"verify", "--field", path("a.json"), "--shiffman", "--immersion", "--out", path("v.json")});
  ASSERT_EQ(v.code, 0) << v.err;
  const json j = json::parse(slurp(path("v.json")));
  for (const char* key : {"sinh_gordon", "max_u", "jacobi_residual", "shiffman_consistency_linf",
                          "potential_identity_linf", "gauss_dual_route_linf", "compat_linf", "isometry_linf",
                          "hopf_real_err", "hopf_imag_err", "harmonic_linf", "holonomy", "config", "version"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_LT(j.at("sinh_gordon").at("linf").get<double>(), 1e-2);
  EXPECT_LT(j.at("max_u").get<double>(), 1e-2);
  EXPECT_EQ(j.at("holonomy"), nullptr);  // one period does not fit on [0, 1]
  EXPECT_EQ(j.at("config").at("subcommand"), "verify");
  ASSERT_EQ(run({"verify", "--field", path("a.json"), "--shiffman", "--immersion", "--out", path("w.json")}).code, 0);
  EXPECT_EQ(slurp(path("v.json")), slurp(path("w.json")));
}

TEST_F(CliFiles, MeshObj) {
  const Result r = run({"mesh", "--c0", "-1", "--c", "-0.25", "--d", "-0.25", "--domain", "-0.5", "0.5", "-0.5",
                        "0.5", "--nx", "11", "--ny", "6", "--out", path("m.obj")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream obj(slurp(path("m.obj")));
  std::string line;
  std::size_t v = 0, va = 0, f = 0, l = 0;
  bool hyperboloid = false;
  while (std::getline(obj, line)) {
    if (line.rfind("v ", 0) == 0) ++v;
    if (line.rfind("# va ", 0) == 0 && line.find("hyperboloid") == std::string::npos) ++va;
    if (line.find("hyperboloid") != std::string::npos) hyperboloid = true;
    if (line.rfind("f ", 0) == 0) ++f;
    if (line.rfind("l ", 0) == 0) ++l;
  }
  EXPECT_TRUE(hyperboloid);
  EXPECT_EQ(v, 66u);
  EXPECT_EQ(va, 66u);
  EXPECT_EQ(f, 50u);
  EXPECT_EQ(l, 6u);
  EXPECT_NE(r.err.find("66 vertices"), std::string::npos);

  EXPECT_EQ(run({"mesh", "--c0", "-1", "--c", "-0.25", "--d", "-0.25", "--weierstrass"}).code, 1);
  const Result w = run({"mesh", "--c0", "0", "--c", "-0.25", "--d", "-0.25", "--domain", "0.2", "1.2", "0.2", "1.2",
                        "--nx", "21", "--ny", "21", "--weierstrass"});
  EXPECT_EQ(w.code, 0) << w.err;
  EXPECT_NE(w.out.find("# chart EuclideanPlane"), std::string::npos);
}

TEST(Cli, Holonomy) {
  const Result r = run({"holonomy", "--c0", "1", "--c", "0", "--d", "-0.25", "--trivial-f", "--domain", "0", "6.94",
                        "0", "2", "--nx", "695", "--ny", "201", "--seed", "0", "1.4844", "--substeps", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("type"), "rotation");
  EXPECT_LT(j.at("residual").get<double>(), 1e-8);
  EXPECT_GT(j.at("period").get<double>(), 0.0);
  EXPECT_EQ(j.at("config").at("substeps"), 4);

  // The tangent family has no period.
  const Result g = run({"holonomy", "--c0", "-1", "--c", "0.25", "--d", "0.25", "--domain", "-0.5", "0.5", "-0.5",
                        "0.5", "--nx", "21", "--ny", "21"});
  EXPECT_EQ(g.code, 1);
  EXPECT_NE(g.err.find("PeriodUnavailable"), std::string::npos);
}
