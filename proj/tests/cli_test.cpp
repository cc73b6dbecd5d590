#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args, const std::string& env = {}) {
  const fs::path log = fs::temp_directory_path() / "travshacl_cli_out.txt";
  const std::string cmd = env + " \"" TRAVSHACL_CLI "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  o.out = ss.str();
  return o;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("travshacl_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kSchema = TRAVSHACL_FIXTURES "/university.json";
const std::string kData = TRAVSHACL_FIXTURES "/university_small.nt";

}  // namespace

TEST(Cli, ValidateWritesReport) {
  const fs::path out = scratch("validate");
  const Outcome o = run("validate -q --schema " + kSchema + " --data " + kData + " --out " + out.string());
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_TRUE(fs::exists(out / "verdicts.csv"));
  EXPECT_TRUE(fs::exists(out / "trace.csv"));
  EXPECT_TRUE(fs::exists(out / "metrics.json"));
}

TEST(Cli, EnvironmentSuppliesOptions) {
  const fs::path out = scratch("env");
  const Outcome o = run("validate -q", "SHACLTRAV_SCHEMA=" + kSchema + " SHACLTRAV_DATA=" + kData +
                                           " SHACLTRAV_OUT=" + out.string());
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_TRUE(fs::exists(out / "verdicts.csv"));
}

TEST(Cli, PlanListsTraversalOrder) {
  const Outcome o = run("plan --schema " + kSchema);
  ASSERT_EQ(o.code, 0) << o.out;
  const auto uni = o.out.rfind("University");
  const auto dept = o.out.rfind("Department");
  const auto prof = o.out.rfind("Professor");
  const auto course = o.out.rfind("Course");
  ASSERT_NE(course, std::string::npos);
  EXPECT_LT(uni, dept);
  EXPECT_LT(dept, prof);
  EXPECT_LT(prof, course);
}

TEST(Cli, NegativeCycleExitsWithSchemaError) {
  const fs::path dir = scratch("cycle");
  std::ofstream(dir / "cycle.json") << R"({"shapes": [
    {"name": "A", "targetClass": "http://ex/C",
     "constraints": [{"kind": "min", "count": 1, "path": "http://ex/p", "shape": "B", "negated": true}]},
    {"name": "B",
     "constraints": [{"kind": "min", "count": 1, "path": "http://ex/p", "shape": "A", "negated": true}]}]})";
  const Outcome o = run("validate -q --schema " + (dir / "cycle.json").string() + " --data " + kData +
                        " --out " + (dir / "r").string());
  EXPECT_EQ(o.code, 2) << o.out;
  EXPECT_NE(o.out.find("A"), std::string::npos);
}

TEST(Cli, UnreachableEndpointExitsWithTransportError) {
  const fs::path out = scratch("remote");
  const Outcome o = run("validate -q --schema " + kSchema +
                        " --endpoint http://127.0.0.1:1/sparql --timeout 2 --out " + out.string());
  EXPECT_EQ(o.code, 3) << o.out;
}

TEST(Cli, MissingDataExitsWithConfigError) {
  const Outcome o = run("validate -q --schema " + kSchema + " --data /nonexistent/data.nt --out " +
                        scratch("missing").string());
  EXPECT_EQ(o.code, 1) << o.out;
}

TEST(Cli, ConfigFileBelowCommandLine) {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "cfg.json") << "{\"schema\": \"" + kSchema + "\", \"data\": \"" + kData +
                                         "\", \"out\": \"" + (dir / "from_config").string() + "\"}";
  Outcome o = run("validate -q --config " + (dir / "cfg.json").string());
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_TRUE(fs::exists(dir / "from_config" / "verdicts.csv"));
  o = run("validate -q --config " + (dir / "cfg.json").string() + " --out " + (dir / "from_cli").string());
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_TRUE(fs::exists(dir / "from_cli" / "verdicts.csv"));
}

TEST(Cli, BenchGenerateWritesTestbed) {
  const fs::path out = scratch("gen");
  const Outcome o = run("bench generate --size 3 --scale 2000 --invalid-pct 50 --out " + out.string());
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_TRUE(fs::exists(out / "schema.json"));
  EXPECT_TRUE(fs::exists(out / "data.nt"));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
}
