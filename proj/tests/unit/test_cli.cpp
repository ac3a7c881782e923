#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rpl/cli.hpp"
#include "rpl/config.hpp"
#include "rpl/error.hpp"
#include "rpl/parallel.hpp"

using namespace rpl;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "grid": {"lo": -4, "hi": 4, "n": 128},
  "functions": [{"family": "gaussian_bump", "sigma": 1}, {"family": "gaussian_bump", "center": 0.5, "sigma": 0.8}],
  "chain": {"kind": "pli", "t": 0.5}
})";

std::string error_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("rpl_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write(const fs::path& dir, const std::string& text) {
  fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& command, const fs::path& config, const fs::path& out, std::string* err_text = nullptr) {
  CommandLine cl;
  cl.command = command;
  cl.config = config;
  cl.out = out;
  std::ostringstream log, err;
  int code = run_command(cl, log, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
  ExperimentConfig c = parse_config(kMinimal);
  CHECK(c.grid.n == std::vector<int>{128});
  CHECK(c.functions.size() == 2);
  CHECK(c.chain.kind == "pli");
  CHECK(source_grid(c).size() == 128);
  CHECK(build_functions(c).size() == 2);

  std::string commented = "// leading comment\n" + std::string(kMinimal);
  CHECK_NOTHROW(parse_config(commented));

  ExperimentConfig inf = parse_config(replace(kMinimal, R"("kind": "pli", "t": 0.5)", R"("kind": "bbl", "p": "inf")"));
  CHECK(inf.chain.p == ExtendedReal::pos_inf());
}

TEST_CASE("config diagnostics") {
  CHECK(error_of("{\"grid\": {\"lo\": -4,, }}").find("line 1, column") != std::string::npos);
  CHECK(error_of(replace(kMinimal, "\"grid\"", "\"gird\"")).find("gird") != std::string::npos);
  CHECK(error_of(replace(kMinimal, "\"n\": 128", "\"n\": 12.5")).find("config field 'grid.n'") != std::string::npos);
  CHECK(error_of(replace(kMinimal, "\"gaussian_bump\", \"sigma\"", "\"wobble\", \"sigma\"")).find("functions[0]") !=
        std::string::npos);
  CHECK(error_of(replace(kMinimal, "\"t\": 0.5", "\"t\": \"half\"")).find("chain.t") != std::string::npos);
  CHECK_FALSE(error_of("[1, 2]").empty());
  CHECK(error_of(R"({"functions": []})").find("grid") != std::string::npos);
}

TEST_CASE("resolution override") {
  ExperimentConfig c = parse_config(kMinimal);
  apply_resolution(c, 64);
  CHECK(source_grid(c).n(0) == 64);
  CHECK_THROWS_AS(apply_resolution(c, 1), ConfigError);
}

TEST_CASE("chain command writes reports and is deterministic") {
  fs::path dir = scratch("chain");
  fs::path config = write(dir, kMinimal);
  CHECK(run("chain", config, dir / "a") == kExitPass);
  CHECK(run("chain", config, dir / "b") == kExitPass);
  CHECK(fs::exists(dir / "a" / "report.json"));
  CHECK(slurp(dir / "a" / "report.csv") == slurp(dir / "b" / "report.csv"));
  auto ja = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
  auto jb = nlohmann::json::parse(slurp(dir / "b" / "report.json"));
  ja.erase("runtime_seconds");
  jb.erase("runtime_seconds");
  CHECK(ja == jb);
  CHECK(ja["passed"] == true);
}

TEST_CASE("seed override changes random families only through the seed") {
  fs::path dir = scratch("seed");
  std::string text = replace(kMinimal, R"({"family": "gaussian_bump", "sigma": 1})", R"({"family": "piecewise_random", "levels": 5})");
  fs::path config = write(dir, text);
  CommandLine cl{"chain", config, dir / "s1", std::uint64_t{7}, std::nullopt};
  std::ostringstream log, err;
  CHECK(run_command(cl, log, err) == kExitPass);
  cl.out = dir / "s2";
  CHECK(run_command(cl, log, err) == kExitPass);
  CHECK(slurp(dir / "s1" / "report.csv") == slurp(dir / "s2" / "report.csv"));
  cl.out = dir / "s3";
  cl.seed_override = 8;
  CHECK(run_command(cl, log, err) == kExitPass);
  CHECK(slurp(dir / "s1" / "report.csv") != slurp(dir / "s3" / "report.csv"));
}

TEST_CASE("rearrange, convergence and profile commands") {
  fs::path dir = scratch("commands");
  fs::path config = write(dir, replace(kMinimal, "\"chain\": {\"kind\": \"pli\", \"t\": 0.5}",
                                       "\"chain\": {\"kind\": \"pli\", \"t\": 0.5},\n"
                                       "  \"convergence\": {\"resolutions\": [64, 128, 256]}"));
  CHECK(run("rearrange", config, dir / "r") == kExitPass);
  for (const char* name : {"f.txt", "fstar.txt", "report.json", "report.csv"}) CHECK(fs::exists(dir / "r" / name));
  CHECK(run("convergence", config, dir / "c") == kExitPass);
  CHECK(slurp(dir / "c" / "convergence.csv").rfind("chain,gap,n,h,value,limit,error,tol\n", 0) == 0);
  CHECK(run("profile", config, dir / "p") == kExitPass);
  std::string profile = slurp(dir / "p" / "profile.csv");
  CHECK(profile.rfind("x,f,fstar\n", 0) == 0);
  CHECK(std::count(profile.begin(), profile.end(), '\n') == 129);
}

TEST_CASE("exit codes") {
  fs::path dir = scratch("codes");
  std::string err;
  CHECK(run("chain", write(dir, replace(kMinimal, R"("kind": "pli", "t": 0.5)", R"("kind": "bbl", "p": -2)")),
            dir / "o", &err) == kExitPrecondition);
  CHECK(err.find("witness") != std::string::npos);
  CHECK(run("chain", write(dir, "{ not json"), dir / "o") == kExitPrecondition);
  CHECK(run("chain", dir / "missing.json", dir / "o") == kExitPrecondition);
  CHECK(run("frobnicate", write(dir, kMinimal), dir / "o") == kExitPrecondition);

  std::string planar = R"({
    "grid": {"lo": [-2, -2], "hi": [2, 2], "n": [16, 16]},
    "functions": [{"family": "gaussian_bump", "center": [0, 0], "sigma": 1}],
    "chain": {"kind": "pli"}
  })";
  CHECK(run("profile", write(dir, planar), dir / "o", &err) == kExitPrecondition);

  std::string polar = R"({
    "grid": {"lo": -2, "hi": 14, "n": 320},
    "functions": [{"family": "indicator", "regions": [{"box": {"lo": 0, "hi": 1}}]},
                  {"family": "indicator", "regions": [{"box": {"lo": 0, "hi": 10}}]}],
    "chain": {"kind": "polar", "t": 0.1, "lambda": 0.9}
  })";
  CHECK(run("chain", write(dir, polar), dir / "o") == kExitViolation);
}

TEST_CASE("worker count and thread-count independence") {
  setenv("REARRANGE_PL_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  std::atomic<int> sum{0};
  parallel_for(100, [&](std::size_t i) { sum += static_cast<int>(i); });
  CHECK(sum == 4950);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 7) throw InvalidArgument("boom"); }), InvalidArgument);

  fs::path dir = scratch("threads");
  fs::path config = write(dir, replace(kMinimal, "\"chain\": {\"kind\": \"pli\", \"t\": 0.5}",
                                       "\"chain\": {\"kind\": \"pli\", \"t\": 0.5},\n"
                                       "  \"convergence\": {\"resolutions\": [64, 128, 256]}"));
  CHECK(run("convergence", config, dir / "three") == kExitPass);
  setenv("REARRANGE_PL_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  CHECK(run("convergence", config, dir / "one") == kExitPass);
  CHECK(slurp(dir / "one" / "convergence.csv") == slurp(dir / "three" / "convergence.csv"));
  setenv("REARRANGE_PL_THREADS", "0", 1);
  CHECK(worker_count() >= 1);
  unsetenv("REARRANGE_PL_THREADS");
}

}
