#include <besovbilin/io.hpp>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace besovbilin;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("besovbilin_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  /// Runs the CLI with `args`, stdout captured in out.txt; returns the exit status.
  int run(const std::string& args) {
    const std::string cmd = std::string(BESOVBILIN_CLI) + " " + args + " > " + path("out.txt") + " 2> " + path("err.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  json stdout_json() const { return json::parse(read("out.txt")); }

  void write(const std::string& name, const std::string& text) const { write_text_file(path(name), text); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ZeroFieldHasZeroNorm) {
  ASSERT_EQ(run("make-function --kind zero --samples 64 --period-scale 2 --out " + path("zero.json")), 0);
  ASSERT_EQ(run("besov-norm --field " + path("zero.json") + " --s 1 --p 2 --q 2"), 0);
  EXPECT_EQ(stdout_json().at("norm").get<double>(), 0.0);
  ASSERT_EQ(run("sobolev-norm --field " + path("zero.json") + " --s 1 --p 2"), 0);
  EXPECT_EQ(stdout_json().at("norm").get<double>(), 0.0);
}

TEST_F(Cli, SpikeFieldClosedForm) {
  // e^{i 64 x} on the desk torus of length 32 pi: only band 6 is hit, with psi_6(64) = 1.
  ASSERT_EQ(run("make-function --grid-preset desk --kind spike --frequency 64 --out " + path("spike.json")), 0);
  ASSERT_EQ(run("besov-norm --field " + path("spike.json") + " --s 1 --p 2 --q 2"), 0);
  const json r = stdout_json();
  EXPECT_NEAR(r.at("norm").get<double>() / (64.0 * std::sqrt(32.0 * kPi)), 1.0, 1e-12);
  bool found = false;
  for (const auto& b : r.at("per_band"))
    if (b.at("l") == 6) found = b.at("band_norm").get<double>() > 0.0;
  EXPECT_TRUE(found);
}

TEST_F(Cli, MalformedInputs) {
  write("bad.json", "{ \"dimension\": 1, ");
  EXPECT_EQ(run("besov-norm --field " + path("bad.json")), 2);
  EXPECT_EQ(run("besov-norm --field " + path("missing.json")), 2);
  write("short.json", R"({"dimension": 1, "samples_per_axis": 4, "period_scale": 1, "values": [[1, 0]]})");
  EXPECT_EQ(run("besov-norm --field " + path("short.json")), 2);
  EXPECT_EQ(run("besov-norm"), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  ASSERT_EQ(run("make-function --kind zero --samples 64 --out " + path("z.json")), 0);
  EXPECT_EQ(run("besov-norm --field " + path("z.json") + " --p 0.5"), 2);
}

TEST_F(Cli, ApplyIdentityGivesProduct) {
  ASSERT_EQ(run("make-function --kind random-band-limited --samples 64 --period-scale 2 --band 6 --seed 1 --out " +
                path("f1.json")),
            0);
  ASSERT_EQ(run("make-function --kind random-band-limited --samples 64 --period-scale 2 --band 6 --seed 2 --out " +
                path("f2.json")),
            0);
  write("id.json", R"({"family": "identity"})");
  ASSERT_EQ(run("apply-op --symbol " + path("id.json") + " --f1 " + path("f1.json") + " --f2 " + path("f2.json") +
                " --out " + path("t.json")),
            0);
  const SampledField f1 = field_from_json(read_json_file(path("f1.json")));
  const SampledField f2 = field_from_json(read_json_file(path("f2.json")));
  const SampledField t = field_from_json(read_json_file(path("t.json")));
  std::vector<cplx> prod(f1.values.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = f1.values[i] * f2.values[i];
  EXPECT_LE(max_relative_error(t.values, prod), 1e-12);
}

TEST_F(Cli, ApplyDefSymbolClosedForm) {
  const std::string g = "--grid-preset desk ";
  ASSERT_EQ(run("make-function " + g + "--kind modulated-bump --j 6 --sign -1 --out " + path("f1.json")), 0);
  ASSERT_EQ(run("make-function " + g + "--kind modulated-bump --j 6 --sign 1 --out " + path("f2.json")), 0);
  ASSERT_EQ(run("make-function " + g + "--kind low-bump --out " + path("low.json")), 0);
  write("def.json", R"({"family": "def-symbol"})");
  ASSERT_EQ(run("apply-op --symbol " + path("def.json") + " --f1 " + path("f1.json") + " --f2 " + path("f2.json") +
                " --out " + path("t.json")),
            0);
  const SampledField low = field_from_json(read_json_file(path("low.json")));
  const SampledField t = field_from_json(read_json_file(path("t.json")));
  std::vector<cplx> ref(low.values.size());
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = std::pow(2.0, -3.0) * low.values[i] * low.values[i];
  EXPECT_LE(max_relative_error(t.values, ref), 1e-6);
}

TEST_F(Cli, ApplyErrors) {
  ASSERT_EQ(run("make-function --kind low-bump --samples 64 --period-scale 2 --out " + path("a.json")), 0);
  ASSERT_EQ(run("make-function --kind low-bump --samples 128 --period-scale 2 --out " + path("b.json")), 0);
  write("id.json", R"({"family": "identity"})");
  EXPECT_EQ(run("apply-op --symbol " + path("id.json") + " --f1 " + path("a.json") + " --f2 " + path("b.json")), 2);
  ASSERT_EQ(run("make-symbol --family random-general --samples 64 --period-scale 2 --box 8 --out " + path("g.json")), 0);
  EXPECT_EQ(run("apply-op --symbol " + path("g.json") + " --f1 " + path("a.json") + " --f2 " + path("a.json") +
                " --path separable"),
            2);
  EXPECT_EQ(run("apply-op --symbol " + path("id.json") + " --f1 " + path("a.json") + " --f2 " + path("a.json") +
                " --path sideways"),
            2);
}

TEST_F(Cli, ComparePathsOnRandomSeparable) {
  ASSERT_EQ(run("make-symbol --family random-separable --terms 3 --band 8 --seed 4 --out " + path("s.json")), 0);
  for (int i : {1, 2})
    ASSERT_EQ(run("make-function --kind random-band-limited --samples 64 --period-scale 2 --band 8 --seed " +
                  std::to_string(i) + " --out " + path("f" + std::to_string(i) + ".json")),
              0);
  ASSERT_EQ(run("apply-op --symbol " + path("s.json") + " --f1 " + path("f1.json") + " --f2 " + path("f2.json") +
                " --compare-paths"),
            0);
  const json r = stdout_json();
  EXPECT_EQ(r.at("paths").size(), 3u);
  EXPECT_LE(r.at("max_relative_deviation").get<double>(), 1e-10);
}

TEST_F(Cli, MakeSymbolDescriptorAndBandCheck) {
  ASSERT_EQ(run("make-symbol --grid-preset desk --family product --k-min 5 --k-max 8 --m1 -0.5 --descriptor"), 0);
  const json d = stdout_json();
  EXPECT_EQ(d.at("family"), "product");
  EXPECT_EQ(d.at("m1").get<double>(), -0.5);
  EXPECT_EQ(run("make-symbol --grid-preset desk --family def-symbol --k-min 5 --k-max 9"), 2);
  EXPECT_EQ(run("make-function --grid-preset desk --kind modulated-bump --j 9"), 2);
}

TEST_F(Cli, ExperimentConfigEmptyList) {
  write("empty.json", R"({"experiments": []})");
  EXPECT_EQ(run("experiment --config " + path("empty.json") + " --out-dir " + path("out")), 2);
  write("unknown.json", R"({"experiments": [{"type": "sharpness", "colour": 1}]})");
  EXPECT_EQ(run("experiment --config " + path("unknown.json") + " --out-dir " + path("out")), 2);
  EXPECT_EQ(run("experiment --out-dir " + path("out")), 2);
}

TEST_F(Cli, ExperimentReportsAreDeterministic) {
  write("cfg.json", R"({
    "grid": {"preset": "desk"},
    "seed": 3,
    "experiments": [
      {"type": "sharpness", "name": "low-high s=0.5", "output": {"s": 0.5}},
      {"type": "boundedness", "name": "random family", "s1": 0.25, "s2": -0.25, "families": ["random"]},
      {"type": "path-agreement", "instances": 2}
    ]
  })");
  ASSERT_EQ(run("experiment --config " + path("cfg.json") + " --out-dir " + path("r1") + " --plot-data"), 0)
      << read("err.txt");
  ASSERT_EQ(run("experiment --config " + path("cfg.json") + " --out-dir " + path("r2")), 0);
  const json report = read_json_file(path("r1/report.json"));
  EXPECT_TRUE(report.at("pass").get<bool>());
  EXPECT_EQ(report.at("seed"), 3);
  EXPECT_EQ(report.at("reports").size(), 3u);
  const std::string csv = read("r1/report.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "experiment,j,norm,ratio,slope,expected,pass");
  EXPECT_EQ(csv, read("r2/report.csv"));
  EXPECT_TRUE(fs::exists(path("r1/plot/low-high_s_0.5.dat")));
}

TEST_F(Cli, FailingCheckExitsOne) {
  // A deliberately wrong expected exponent must be reported as a failure.
  write("cfg.json", R"({"experiments": [{"type": "sharpness", "expected_exponent": 1.0}]})");
  EXPECT_EQ(run("experiment --config " + path("cfg.json") + " --out-dir " + path("out")), 1);
  EXPECT_FALSE(read_json_file(path("out/report.json")).at("pass").get<bool>());
}

TEST_F(Cli, LemmaSuite) {
  ASSERT_EQ(run("experiment --suite lemmas --grid-preset desk --out-dir " + path("out")), 0) << read("out.txt");
  EXPECT_TRUE(read_json_file(path("out/report.json")).at("pass").get<bool>());
}
