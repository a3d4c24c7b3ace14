#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "voxelastic/cli.hpp"

using namespace voxelastic;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int status;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("voxelastic_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
    session_ = (dir_ / "session.json").string();
  }
  void TearDown() override { fs::remove_all(dir_); }

  Invocation run(std::vector<std::string> args) {
    args.insert(args.begin(), {"--session", session_});
    std::ostringstream out, err;
    const int status = cli::execute(args, out, err);
    return {status, out.str(), err.str()};
  }

  static std::string scenario(const std::string& name) {
    return (fs::path(VOXELASTIC_SCENARIO_DIR) / (name + ".json")).string();
  }

  std::string out_dir() const { return (dir_ / "out").string(); }

  fs::path dir_;
  std::string session_;
};

}  // namespace

TEST_F(CliTest, InfoListsVersionAndProperties) {
  const auto r = run({"info"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find(std::string("voxelastic ") + cli::kVersion), std::string::npos);
  EXPECT_NE(r.out.find("youngs_modulus"), std::string::npos);
  EXPECT_NE(r.out.find("world: none"), std::string::npos);
  EXPECT_EQ(run({"SPHinfo"}).out, r.out);
}

TEST_F(CliTest, PropertiesSetEchoesWithUnits) {
  const auto r = run({"properties", "ult_stress", "4000"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "ult_stress = 4000 Pa\n");
  const auto get = run({"SPHproperties", "ult_stress"});
  EXPECT_EQ(get.out, "ult_stress = 4000 Pa\n");
  const auto list = run({"properties"});
  EXPECT_NE(list.out.find("= 4000 Pa"), std::string::npos);
}

TEST_F(CliTest, PropertyErrors) {
  EXPECT_EQ(run({"properties", "poisson", "0.5"}).status, 1);
  EXPECT_EQ(run({"properties", "wool", "1"}).status, 1);
  EXPECT_EQ(run({"properties", "poisson", "abc"}).status, 2);
  EXPECT_EQ(run({"properties", "poisson"}).out, "poisson = 0.4\n");
}

TEST_F(CliTest, InvalidModeIsUsageError) {
  const auto r = run({"run", "--mode", "elevation", "--radius", "3", "--world", scenario("desert_bridge")});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("Usage:"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, NonIntegerRadiusIsUsageError) {
  const auto r = run({"RunSPH", "stress", "three", "--world", scenario("desert_bridge")});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("Usage:"), std::string::npos);
}

TEST_F(CliTest, UnknownCommandIsUsageError) {
  EXPECT_EQ(run({"explode"}).status, 2);
  EXPECT_EQ(run({}).status, 2);
  EXPECT_EQ(run({"--help"}).status, 0);
}

TEST_F(CliTest, RunRequiresWorld) {
  const auto r = run({"run", "stress", "3"});
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("no world"), std::string::npos);
}

TEST_F(CliTest, RunPrintsDeflectionAndWritesFiles) {
  ASSERT_EQ(run({"--world", scenario("desert_bridge"), "properties", "num_steps", "200"}).status, 0);
  const auto r = run({"run", "--mode", "stress", "--radius", "30", "--seed", "0,0,0", "--out", out_dir()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("deflection: ("), std::string::npos);
  EXPECT_NE(r.out.find("max von Mises: "), std::string::npos);
  EXPECT_NE(r.out.find(" Pa\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(out_dir()) / "result.json"));
  std::ifstream csv(fs::path(out_dir()) / "timeseries.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "step,time,ux,uy,uz,von_mises");

  // identical inputs, identical stdout
  EXPECT_EQ(run({"run", "stress", "30", "--seed", "0,0,0", "--out", out_dir()}).out, r.out);
}

TEST_F(CliTest, PresetAndSpecialBlock) {
  ASSERT_EQ(run({"--world", scenario("cross_sections"), "properties", "num_steps", "100"}).status, 0);
  const auto preset = run({"run", "--preset", "H", "--out", out_dir()});
  ASSERT_EQ(preset.status, 0) << preset.err;
  EXPECT_NE(preset.out.find("tracking: block (8,3,10)"), std::string::npos);

  EXPECT_EQ(run({"setSpecialBlock", "0", "4", "10"}).out, "special block: (0,4,10)\n");
  const auto tracked = run({"run", "position", "6", "--seed", "0,3,5", "--out", out_dir()});
  ASSERT_EQ(tracked.status, 0) << tracked.err;
  EXPECT_NE(tracked.out.find("tracking: block (0,4,10)"), std::string::npos);

  EXPECT_EQ(run({"set-special-block", "99", "99", "99"}).status, 1);
  EXPECT_EQ(run({"set-special-block", "1", "2"}).status, 2);
  EXPECT_EQ(run({"set-special-block", "none"}).status, 0);
  const auto com = run({"run", "position", "6", "--seed", "0,3,5", "--out", out_dir()});
  EXPECT_NE(com.out.find("tracking: centre of mass"), std::string::npos);
}

TEST_F(CliTest, ResetClearsLastResult) {
  ASSERT_EQ(run({"--world", scenario("desert_bridge"), "properties", "num_steps", "20"}).status, 0);
  ASSERT_EQ(run({"run", "--out", out_dir()}).status, 0);
  EXPECT_TRUE(cli::load_session(session_).last_result.has_value());
  EXPECT_EQ(run({"resetblocks"}).status, 0);
  EXPECT_FALSE(cli::load_session(session_).last_result.has_value());
}

TEST_F(CliTest, SimulationErrorsPropagate) {
  ASSERT_EQ(run({"--world", scenario("desert_bridge"), "info"}).status, 0);
  const auto r = run({"run", "stress", "2", "--seed", "10,40,10", "--out", out_dir()});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("NoStructureFound"), std::string::npos);
}

TEST_F(CliTest, SessionPathResolution) {
  EXPECT_EQ(cli::session_path(std::string("a.json")), fs::path("a.json"));
  ::setenv(cli::kSessionEnv, "from_env.json", 1);
  EXPECT_EQ(cli::session_path(std::nullopt), fs::path("from_env.json"));
  ::unsetenv(cli::kSessionEnv);
  EXPECT_EQ(cli::session_path(std::nullopt), fs::path(cli::kDefaultSessionFile));
}

TEST_F(CliTest, SessionRoundTrip) {
  cli::Session s;
  s.world = "/tmp/w.json";
  s.special_block = VoxelCoord{1, -2, 3};
  s.properties = json{{"eta", 10.0}};
  cli::save_session(s, session_);
  const cli::Session back = cli::load_session(session_);
  EXPECT_EQ(back.world, s.world);
  EXPECT_EQ(back.special_block, s.special_block);
  EXPECT_EQ(back.properties, s.properties);
}
