#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "membrane/error.hpp"
#include "membrane_cli/commands.hpp"
#include "membrane_cli/scene_file.hpp"
#include "support/scenes.hpp"

using namespace membrane;
using namespace membrane::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "membrane");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scene_path(const std::string& name) { return std::string(MEMBRANE_SCENES_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("membrane_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(SceneFile, RoundTrip) {
  for (const auto& s : {scene_a(), scene_b(), scene_c(), scene_d()}) {
    const Scene r = cli::scene_from_json(cli::scene_to_json(s));
    ASSERT_EQ(r.domains.size(), s.domains.size());
    EXPECT_EQ(r.dimension, s.dimension);
    for (std::size_t i = 0; i < s.domains.size(); ++i) {
      EXPECT_EQ(r.domains[i].id, s.domains[i].id);
      EXPECT_EQ(r.domains[i].permeability_exponent, s.domains[i].permeability_exponent);
      EXPECT_EQ(r.domains[i].shape.index(), s.domains[i].shape.index());
    }
  }
}

TEST(SceneFile, ShippedScenesLoad) {
  EXPECT_EQ(cli::load_scene(scene_path("scene_b.json")).domains.size(), 7u);
  EXPECT_EQ(cli::load_scene(scene_path("scene_d.json")).dimension, 2);
  EXPECT_EQ(cli::load_scene(scene_path("scene_d.json")).domains[2].permeability_exponent, ExponentQ(2));
}

TEST(SceneFile, ErrorsNameTheField) {
  try {
    cli::parse_scene(R"({"dimension":1,"period":1,"domains":[{"id":"a","lo":0.1,"hi":0.2,"colour":3}]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("$.domains[0]"), std::string::npos) << e.what();
  }
  try {
    cli::parse_scene("{\"dimension\": 1,\n \"period\": }", "f.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("f.json:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cli::parse_scene(R"({"dimension":3,"period":1,"domains":[]})"), Error);
  EXPECT_THROW(cli::parse_scene(R"({"dimension":1,"period":1,"domains":[{"id":"a","lo":0.1,"hi":0.2,"permeability_exponent":"x"}]})"),
               Error);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(invoke({}).code, cli::kUsage);
  EXPECT_EQ(invoke({"classify"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"classify", scene_path("scene_b.json"), "-b", "oops"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"classify", "/nonexistent.json", "-b", "1/2"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"classify", scene_path("scene_b.json"), "-b", "1/2"}).code, cli::kOk);
  EXPECT_EQ(invoke({"simulate", scene_path("scene_a.json"), "--epsilon", "0.1", "--t-final", "0.1", "--start", "0.5",
                 "--particles", "0", "--out", "/tmp/x"})
                .code,
            cli::kUsage);
}

TEST(Cli, ClassifyAndPredictSceneB) {
  const auto c = invoke({"classify", scene_path("scene_b.json"), "-b", "3/2", "--json"});
  ASSERT_EQ(c.code, 0) << c.err;
  const auto j = nlohmann::json::parse(c.out);
  EXPECT_FALSE(j.dump().empty());
  const auto p = invoke({"predict", scene_path("scene_b.json"), "-b", "1/2", "--start", "0.01", "--json"});
  ASSERT_EQ(p.code, 0) << p.err;
  const auto m = nlohmann::json::parse(p.out);
  EXPECT_NEAR(m.at("mixture").at("D1").get<double>(), 0.6, 1e-9);
  EXPECT_NEAR(m.at("mixture").at("D3").get<double>(), 0.4, 1e-9);
  const auto text = invoke({"predict", scene_path("scene_b.json"), "-b", "5/2", "--start", "0.675"});
  EXPECT_EQ(text.code, 0);
  EXPECT_NE(text.out.find("D1"), std::string::npos);
}

TEST(Cli, VerifyInjectedWrongPredictionFails) {
  const auto r = invoke({"verify", scene_path("scene_b.json"), "--suite", "end-to-end", "--epsilon", "0.02", "-b", "5/2",
                      "--start", "0.25", "--particles", "1000", "--engine", "lattice", "--inject-wrong"});
  EXPECT_EQ(r.code, cli::kCriterionFailed) << r.err;
  const auto ok = invoke({"verify", scene_path("scene_b.json"), "--suite", "end-to-end", "--epsilon", "0.02", "-b", "5/2",
                       "--start", "0.25", "--particles", "1000", "--engine", "lattice"});
  EXPECT_EQ(ok.code, cli::kOk) << ok.out << ok.err;
}

TEST(Cli, SimulateWritesOutputsDeterministically) {
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  const fs::path d = temp_dir("sim");
  std::vector<std::string> base{"simulate", scene_path("scene_b.json"), "--epsilon", "0.2", "--t-final", "0.05",
                                "--start", "0.42", "--particles", "200", "--seed", "7", "--events"};
  auto a = base, b = base, c = base;
  a.insert(a.end(), {"--out", (d / "a_").string()});
  b.insert(b.end(), {"--out", (d / "b_").string()});
  c.insert(c.end(), {"--out", (d / "c_").string()});
  c[c.size() - 4] = "8";
  ASSERT_EQ(invoke(a).code, 0);
  ASSERT_EQ(invoke(b).code, 0);
  ASSERT_EQ(invoke(c).code, 0);
  for (const auto* f : {"histogram.csv", "occupation.csv", "leaves.csv", "events.csv"}) {
    EXPECT_EQ(slurp(d / (std::string("a_") + f)), slurp(d / (std::string("b_") + f))) << f;
    EXPECT_FALSE(slurp(d / (std::string("a_") + f)).empty()) << f;
  }
  EXPECT_NE(slurp(d / "a_events.csv"), slurp(d / "c_events.csv"));
  const auto m = nlohmann::json::parse(slurp(d / "a_manifest.json"));
  EXPECT_EQ(m.at("seed").get<std::uint64_t>(), 7u);
  EXPECT_EQ(m.at("command").get<std::string>(), "simulate");
  EXPECT_EQ(m.at("timestamp").get<std::string>(), "2023-11-14T22:13:20Z");
  fs::remove_all(d);
}

TEST(Cli, SeedResolution) {
  ::unsetenv("MEMBRANE_SEED");
  EXPECT_EQ(cli::resolve_seed(std::nullopt), 42u);
  ::setenv("MEMBRANE_SEED", "9", 1);
  EXPECT_EQ(cli::resolve_seed(std::nullopt), 9u);
  EXPECT_EQ(cli::resolve_seed(3), 3u);
  ::unsetenv("MEMBRANE_SEED");
}
