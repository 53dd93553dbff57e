#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "despso/cli.hpp"
#include "despso/csv.hpp"
#include "despso/des.hpp"

using namespace despso;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
  const char* base = std::getenv("DESPSO_TEST_TMP");
  const fs::path dir = fs::path(base ? base : fs::temp_directory_path().string()) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

csv::Table table(const fs::path& p) {
  std::ifstream f(p);
  return csv::read_table(f);
}

// Small enough to keep solve/bench runs quick.
std::vector<std::string> quick(std::vector<std::string> args) {
  for (const char* a : {"--pop-size", "10", "--max-iters", "60", "--max-steps", "500"})
    args.emplace_back(a);
  return args;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"generate", "--bogus"}).code == cli::kUsage);
  CHECK(run({"solve", "--mode", "fastest"}).code == cli::kUsage);
  CHECK(run({"generate", "--n", "abc"}).code == cli::kUsage);
  CHECK(run({"--help"}).code == cli::kOk);

  const Result r = run({"generate", "--n", "1"});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("n must be >= 2") != std::string::npos);
  CHECK(run({"generate", "--dim", "0"}).code == cli::kUsage);
  CHECK(run({"generate", "--kappa", "-1"}).code == cli::kUsage);
}

TEST_CASE("generate writes a point set") {
  const fs::path dir = scratch("generate");
  const std::vector<std::string> args{"generate", "--n",         "16",        "--dim", "2",
                                      "--seed",   "7",           "--out",     dir.string(),
                                      "--max-steps", "300"};
  const Result r = run(args);
  CHECK((r.code == cli::kOk || r.code == cli::kNotStationary));
  CHECK(r.out.find("CD2") != std::string::npos);
  CHECK(r.out.find("iterations") != std::string::npos);
  const fs::path csv_path = dir / "des_points.csv";
  REQUIRE(fs::exists(csv_path));
  const std::string first = slurp(csv_path);

  // Same flags, same bytes.
  run(args);
  CHECK(slurp(csv_path) == first);

  // The file holds exactly what the library produces.
  des::DesConfig cfg;
  cfg.max_steps = 300;
  const des::DesResult ref = des::generate_des(16, 2, cfg, 7);
  std::ifstream f(csv_path);
  CHECK(des::read_csv(f).coords() == ref.points.coords());
}

TEST_CASE("generate reports non-stationary runs with exit code 2") {
  const fs::path dir = scratch("nonstationary");
  const Result r = run({"generate", "--n", "32", "--dim", "3", "--max-steps", "5", "--output",
                        (dir / "p.csv").string()});
  CHECK(r.code == cli::kNotStationary);
  CHECK(r.err.find("not stationary") != std::string::npos);
  CHECK(table(dir / "p.csv").rows.size() == 32);

  const Result ok = run({"generate", "--n", "2", "--dim", "1", "--stop-tol", "1e-2", "--output",
                         (dir / "q.csv").string()});
  CHECK(ok.code == cli::kOk);
  CHECK(ok.err.empty());
}

TEST_CASE("config file and environment") {
  const fs::path dir = scratch("config");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# defaults for this test\nn = 5\ndim = 3\nmax-steps = 20\n";
  }
  Result r = run({"generate", "--config", (dir / "run.cfg").string(), "--out", dir.string()});
  auto t = table(dir / "des_points.csv");
  CHECK(t.rows.size() == 5);
  CHECK(t.header.size() == 3);

  // Command-line flags win over the file.
  r = run({"generate", "--config", (dir / "run.cfg").string(), "--n", "7", "--out", dir.string()});
  CHECK(table(dir / "des_points.csv").rows.size() == 7);

  const fs::path env_dir = dir / "from_env";
  ::setenv("DESPSO_OUT_DIR", env_dir.c_str(), 1);
  r = run({"generate", "--n", "4", "--dim", "1", "--max-steps", "10"});
  ::unsetenv("DESPSO_OUT_DIR");
  CHECK(fs::exists(env_dir / "des_points.csv"));

  CHECK(run({"generate", "--config", (dir / "missing.cfg").string()}).code == cli::kUsage);
}

TEST_CASE("solve the linear system") {
  const fs::path dir = scratch("solve_linear");
  const Result r = run(quick({"solve", "--problem", "linear2x2", "--mode", "both", "--samples",
                              "50", "--out", dir.string()}));
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("hclpso min") != std::string::npos);
  CHECK(r.out.find("despso max") != std::string::npos);
  CHECK(r.out.find("x1") != std::string::npos);
  CHECK(r.out.find("x2") != std::string::npos);
  for (const char* resp : {"x1", "x2"})
    for (const char* mode : {"hclpso", "despso"})
      for (const char* tag : {"min", "max"}) {
        const fs::path p =
            dir / ("report_" + std::string(resp) + "_" + mode + "_" + tag + ".csv");
        CAPTURE(p);
        REQUIRE(fs::exists(p));
        CHECK(table(p).rows.size() == 61);
      }
  CHECK(table(dir / "solution_domain.csv").rows.size() == 50);
}

TEST_CASE("solve with default settings recovers the exact bounds") {
  const fs::path dir = scratch("solve_default");
  const Result r =
      run({"solve", "--problem", "linear2x2", "--mode", "despso", "--out", dir.string()});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("-5.333") != std::string::npos);
  CHECK(r.out.find(" 5.333") != std::string::npos);
}

TEST_CASE("solve a problem file") {
  const fs::path dir = scratch("solve_file");
  {
    std::ofstream f(dir / "p.txt");
    f << "variable x -1 2\nresponse sq = x^2\n";
  }
  const Result r = run(quick({"solve", "--problem", (dir / "p.txt").string(), "--mode", "hclpso",
                              "--out", dir.string()}));
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("0.000") != std::string::npos);
  CHECK(r.out.find("4.000") != std::string::npos);
  CHECK(!fs::exists(dir / "solution_domain.csv"));

  CHECK(run({"solve", "--problem", "nowhere"}).code == cli::kUsage);

  {
    std::ofstream f(dir / "bad.txt");
    f << "variable x -1 2\nresponse r = x +\n";
  }
  CHECK(run({"solve", "--problem", (dir / "bad.txt").string()}).code == cli::kUsage);

  {
    std::ofstream f(dir / "nan.txt");
    f << "variable x -1 2\nresponse r = 0 / (x - x)\n";
  }
  const Result nan = run(quick({"solve", "--problem", (dir / "nan.txt").string(), "--out",
                                dir.string()}));
  CHECK(nan.code == cli::kFailure);
  CHECK(nan.err.find("non-finite") != std::string::npos);
}

TEST_CASE("bench") {
  const fs::path dir = scratch("bench");
  const Result r = run(quick({"bench", "--problem", "linear2x2", "--seeds", "2", "--jobs", "2",
                              "--out", dir.string()}));
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("Average improvement (lower)") != std::string::npos);
  CHECK(r.out.find("Average improvement (upper)") != std::string::npos);
  const auto speed = table(dir / "bench_speedup.csv");
  CHECK(speed.rows.size() == 8);
  const auto oracle = table(dir / "oracle.csv");
  REQUIRE(oracle.rows.size() == 2);
  CHECK(std::abs(csv::parse_double(oracle.rows[0][2]) - 16.0 / 3.0) < 5e-3);

  // Seeds given explicitly.
  run(quick({"bench", "--seed-list", "5,9,11", "--out", dir.string()}));
  const auto listed = table(dir / "bench_speedup.csv");
  CHECK(listed.rows.size() == 12);
  CHECK(listed.rows[0][2] == "5");
  CHECK(listed.rows[11][2] == "11");

  CHECK(run({"bench", "--seeds", "0"}).code == cli::kUsage);
  CHECK(run({"bench", "--tol", "0"}).code == cli::kUsage);

  {
    std::ofstream f(dir / "user.txt");
    f << "variable x 0 1\nresponse r = x\n";
  }
  CHECK(run({"bench", "--problem", (dir / "user.txt").string(), "--out", dir.string()}).code ==
        cli::kFailure);
}

TEST_CASE("the installed binary reports the same exit codes") {
  const fs::path dir = scratch("binary");
  auto status = [&](const std::string& args) {
    const std::string cmd = std::string("\"") + DESPSO_CLI_PATH + "\" " + args + " > \"" +
                            (dir / "log.txt").string() + "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(raw));
    return WEXITSTATUS(raw);
  };
  CHECK(status("generate --n 1") == 1);
  CHECK(status("generate --n 8 --dim 2 --max-steps 3 --out \"" + dir.string() + "\"") == 2);
  CHECK(status("--help") == 0);
}
