#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ddl/cli.hpp"

using namespace ddl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "ddlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ddl_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("classify prints the regime tag") {
  Outcome o = run({"classify", "--r", "2", "--m", "2", "--gamma", "1.2"});
  CHECK(o.code == kExitOk);
  CHECK(o.out == "thm31\n");
  o = run({"classify", "--r", "1", "--m", "1", "--gamma", "2.5", "--h3"});
  CHECK(o.out == "thm32\n");
  o = run({"classify", "--r", "1", "--m", "1", "--gamma", "0.5"});
  CHECK(o.out == "unsupported\n");
  CHECK(run({"classify", "--r", "-1", "--m", "1", "--gamma", "1"}).code == kExitConfig);
}

TEST_CASE("argument errors exit with the configuration code") {
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"frobnicate"}).code == kExitConfig);
  CHECK(run({"classify", "--r", "2"}).code == kExitConfig);
  CHECK(run({"classify", "--r", "two", "--m", "1", "--gamma", "1"}).code == kExitConfig);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("solve, diagnose and compare round trip") {
  const fs::path dir = scratch("solve");
  Outcome o = run({"solve", "--preset", "heat", "--N", "64", "--T", "0.5", "--out", (dir / "a").string()});
  REQUIRE(o.code == kExitOk);
  CHECK(o.out.find("wrote 11 snapshots") != std::string::npos);
  REQUIRE(run({"solve", "--preset", "heat", "--N", "64", "--T", "0.5", "--out", (dir / "b").string()}).code ==
          kExitOk);

  o = run({"compare", "--a", (dir / "a").string(), "--b", (dir / "b").string(), "--out", dir.string()});
  CHECK(o.code == kExitOk);
  CHECK(o.out == "p,distance\n1,0\n2,0\ninf,0\n");
  CHECK(fs::exists(dir / "distances.csv"));

  o = run({"compare", "--a", (dir / "a").string(), "--b", (dir / "b").string(), "--p", "1,3"});
  CHECK(o.out == "p,distance\n1,0\n3,0\n");
  CHECK(run({"compare", "--a", (dir / "a").string(), "--b", (dir / "missing").string()}).code != kExitOk);

  o = run({"diagnose", "--in", (dir / "a").string(), "--out", (dir / "diag").string()});
  CHECK(o.code == kExitOk);
  CHECK(o.out.find("energy") != std::string::npos);
  CHECK(fs::exists(dir / "diag" / "diagnostics.csv"));
}

TEST_CASE("configuration problems exit with code 2") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "bad.cfg");
    f << "[problem]\npreset = heat\ncolour = red\n";
  }
  Outcome o = run({"solve", "--config", (dir / "bad.cfg").string(), "--out", (dir / "o").string()});
  CHECK(o.code == kExitConfig);
  CHECK(o.err.find("problem.colour") != std::string::npos);
  CHECK(run({"solve", "--preset", "nope"}).code == kExitConfig);
  CHECK(run({"solve", "--preset", "heat", "--T", "-1"}).code == kExitConfig);
}

TEST_CASE("negative viscosity is rejected before integration") {
  const fs::path dir = scratch("negative");
  const Outcome o = run({"solve", "--preset", "heat", "--epsilon", "-0.05", "--N", "64", "--out", dir.string()});
  CHECK(o.code == kExitConfig);
  CHECK_FALSE(fs::exists(dir));
}
