#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qwalk/cli.hpp"
#include "qwalk/csv.hpp"

using namespace qwalk;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("qwalk_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ignored;
    fs::remove_all(path, ignored);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

cli::RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "qwalk");
  return cli::parse_config(args);
}

int run_main(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "qwalk");
  std::ostringstream out, err;
  const int code = cli::main(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("evolve flags map onto the config") {
  const auto c = parse({"evolve", "--alpha", "21/44", "--steps", "100", "--theta", "1.5707963", "--phi", "1.5707963",
                        "-o", "out.csv"});
  CHECK(c.command == cli::Command::Evolve);
  CHECK(c.alpha == FluxRatio::rational(21, 44));
  CHECK(c.steps == std::vector<int>{100});
  CHECK(c.theta == doctest::Approx(1.5707963));
  CHECK(c.phi == doctest::Approx(1.5707963));
  CHECK(c.output == "out.csv");
  CHECK(parse({"evolve", "--alpha", "5/10", "-o", "x.csv"}).alpha == FluxRatio::rational(1, 2));
  CHECK(parse({"evolve", "--alpha", "golden", "-o", "x.csv"}).alpha.value() == kGoldenRatio);
}

TEST_CASE("sweep flags map onto the config") {
  const auto c = parse({"sweep", "--alpha-min", "0", "--alpha-max", "1", "--alpha-count", "1000", "--steps",
                        "2,4,8,20,60", "--normalize", "-o", "s.csv"});
  CHECK(c.command == cli::Command::Sweep);
  CHECK(c.alpha_count == 1000);
  CHECK(c.steps == std::vector<int>{2, 4, 8, 20, 60});
  CHECK(c.normalize);
  CHECK(parse({"sweep", "-o", "s.csv"}).steps == std::vector<int>{2, 4, 8, 20, 60});
  CHECK(parse({"surface", "-o", "s.csv"}).steps == std::vector<int>{500});
  CHECK(parse({"convergents", "--x", "inv-pi", "--depth", "5", "-o", "c.csv"}).x == doctest::Approx(std::numbers::inv_pi));
}

TEST_CASE("bad arguments are configuration errors") {
  const std::vector<std::vector<std::string>> bad{
      {"evolve", "--alpha", "1/0", "-o", "x.csv"},
      {"evolve", "--alpha", "banana", "-o", "x.csv"},
      {"evolve", "--steps", "0", "-o", "x.csv"},
      {"evolve", "--steps", "-3", "-o", "x.csv"},
      {"evolve", "--theta", "4", "-o", "x.csv"},
      {"evolve", "--smooth-sigma", "-1", "-o", "x.csv"},
      {"evolve"},
      {"sweep", "--steps", "2,,4", "-o", "x.csv"},
      {"sweep", "--alpha-count", "0", "-o", "x.csv"},
      {"sweep", "--observable", "nope", "-o", "x.csv"},
      {"surface", "--avg-window", "600", "-o", "x.csv"},
      {"convergents", "--depth", "0", "-o", "x.csv"},
      {"frobnicate"},
      {},
  };
  for (const auto& args : bad) {
    std::string joined;
    for (const auto& a : args) joined += a + " ";
    CAPTURE(joined);
    std::string err;
    CHECK(run_main(args, &err) == 2);
    CHECK_FALSE(err.empty());
  }
}

TEST_CASE("help exits cleanly") {
  CHECK(run_main({"--help"}) == 0);
  CHECK(run_main({"evolve", "--help"}) == 0);
}

TEST_CASE("config file values sit below the command line") {
  TempDir dir;
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# comment\nalpha = 1/8\nsteps = 12\nsmooth_sigma = 2\n\ntheta=1.0\n";
  }
  const auto c = parse({"evolve", "--config", dir / "run.cfg", "--steps", "30", "-o", dir / "o.csv"});
  CHECK(c.alpha == FluxRatio::rational(1, 8));
  CHECK(c.steps == std::vector<int>{30});
  REQUIRE(c.smooth_sigma.has_value());
  CHECK(*c.smooth_sigma == 2.0);
  CHECK(c.theta == 1.0);

  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "alpha = 1/8\nwarp_factor = 9\n";
  }
  std::string err;
  CHECK(run_main({"evolve", "--config", dir / "bad.cfg", "-o", dir / "o.csv"}, &err) == 2);
  CHECK(err.find("warp_factor") != std::string::npos);
  CHECK(run_main({"evolve", "--config", dir / "missing.cfg", "-o", dir / "o.csv"}) == 2);
}

TEST_CASE("smoothing flag uses the default width") {
  CHECK_FALSE(parse({"evolve", "-o", "x.csv"}).smooth_sigma.has_value());
  CHECK(parse({"evolve", "--smooth", "-o", "x.csv"}).smooth_sigma == 5.0);
  CHECK(parse({"evolve", "--smooth", "--smooth-sigma", "2.5", "-o", "x.csv"}).smooth_sigma == 2.5);
}

TEST_CASE("evolve writes the observable series") {
  TempDir dir;
  const std::string out = dir / "e.csv";
  REQUIRE(run_main({"evolve", "--alpha", "0", "--steps", "4", "-o", out}) == 0);
  const CsvTable t = read_csv(out);
  REQUIRE(t.header == std::vector<std::string>{"t", "variance", "origin_region_prob", "participation_ratio",
                                               "entanglement_entropy"});
  REQUIRE(t.rows.size() == 5);
  CHECK(t.rows[2][0] == 2.0);
  CHECK(t.rows[2][1] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(t.rows[1][2] == 0.0);
  CHECK(t.rows[0][3] == doctest::Approx(1.0));
}

TEST_CASE("evolve smoothing column and probability map") {
  TempDir dir;
  REQUIRE(run_main({"evolve", "--alpha", "golden", "--steps", "40", "--smooth-sigma", "3", "--map-output",
                    dir / "map.csv", "-o", dir / "e.csv"}) == 0);
  const CsvTable t = read_csv(dir / "e.csv");
  REQUIRE(t.header.back() == "origin_region_prob_smoothed");
  for (const auto& row : t.rows) {
    if (static_cast<int>(row[0]) % 2 == 1) CHECK(row[5] == 0.0);
    else CHECK(row[5] > 0.0);
  }
  const CsvTable m = read_csv(dir / "map.csv");
  double total = 0.0;
  for (const auto& row : m.rows) {
    CHECK(std::abs(row[0]) <= 40);
    total += row[2];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("capacity overflow fails without leaving output") {
  TempDir dir;
  std::string err;
  CHECK(run_main({"evolve", "--steps", "20", "--capacity", "10", "--map-output", dir / "map.csv", "-o", dir / "e.csv"},
                 &err) == 1);
  CHECK_FALSE(fs::exists(dir / "e.csv"));
  CHECK_FALSE(fs::exists(dir / "map.csv"));
  CHECK(err.find("step 11") != std::string::npos);
  CHECK(fs::is_empty(dir.path));
}

TEST_CASE("convergents output") {
  TempDir dir;
  REQUIRE(run_main({"convergents", "--x", "golden", "--depth", "6", "-o", dir / "c.csv"}) == 0);
  const CsvTable t = read_csv(dir / "c.csv");
  CHECK(t.header == std::vector<std::string>{"i", "p", "q", "err"});
  REQUIRE(t.rows.size() == 6);
  const double p[] = {0, 1, 1, 2, 3, 5};
  const double q[] = {1, 1, 2, 3, 5, 8};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(t.rows[i][1] == p[i]);
    CHECK(t.rows[i][2] == q[i]);
  }
}

TEST_CASE("sweep and surface outputs do not depend on thread count") {
  TempDir dir;
  for (const char* threads : {"1", "3"}) {
    REQUIRE(run_main({"sweep", "--alpha-count", "50", "--steps", "2,4,8", "--threads", threads, "-o",
                      dir / ("s" + std::string(threads) + ".csv")}) == 0);
    REQUIRE(run_main({"surface", "--alpha", "1/3", "--theta-count", "3", "--phi-count", "5", "--steps", "20",
                      "--avg-window", "5", "--threads", threads, "-o", dir / ("f" + std::string(threads) + ".csv")}) == 0);
  }
  CHECK(slurp(dir / "s1.csv") == slurp(dir / "s3.csv"));
  CHECK(slurp(dir / "f1.csv") == slurp(dir / "f3.csv"));

  const CsvTable s = read_csv(dir / "s1.csv");
  CHECK(s.header == std::vector<std::string>{"alpha", "t=2", "t=4", "t=8"});
  REQUIRE(s.rows.size() == 50);
  for (const auto& row : s.rows) {
    const double c = std::cos(2 * std::numbers::pi * row[0] - std::numbers::pi / 4);
    CHECK(std::abs(row[1] - (3 + 2 * c * c)) < 1e-9);
  }
  const CsvTable f = read_csv(dir / "f1.csv");
  CHECK(f.header.size() == 6);
  CHECK(f.header[0] == "theta");
  CHECK(f.rows.size() == 3);
}

TEST_CASE("normalized sweep rows peak at one") {
  TempDir dir;
  REQUIRE(run_main({"sweep", "--alpha-count", "40", "--steps", "2,6", "--normalize", "--observable", "participation",
                    "-o", dir / "s.csv"}) == 0);
  const CsvTable s = read_csv(dir / "s.csv");
  for (std::size_t col = 1; col < s.header.size(); ++col) {
    double peak = 0.0;
    for (const auto& row : s.rows) peak = std::max(peak, row[col]);
    CHECK(peak == 1.0);
  }
}

TEST_CASE("csv round trip is exact") {
  TempDir dir;
  CsvTable t{{"a", "b"}, {{0.1, -1e-300}, {std::numbers::pi, 12345678901234567.0}}};
  write_csv_atomic(dir / "t.csv", t);
  const CsvTable r = read_csv(dir / "t.csv");
  CHECK(r.header == t.header);
  CHECK(r.rows == t.rows);
  {
    std::ofstream bad(dir / "ragged.csv");
    bad << "a,b\n1,2\n3\n";
  }
  CHECK_THROWS(read_csv(dir / "ragged.csv"));
  CHECK_THROWS(write_csv_atomic(dir / "no/such/dir/t.csv", t));
}

TEST_CASE("binary exit codes") {
  TempDir dir;
  const std::string bin = QWALK_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int raw = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status("evolve --steps 3 -o " + (dir / "ok.csv")) == 0);
  CHECK(fs::exists(dir / "ok.csv"));
  CHECK(status("evolve --steps 3 --capacity 2 -o " + (dir / "bad.csv")) == 1);
  CHECK_FALSE(fs::exists(dir / "bad.csv"));
  CHECK(status("evolve --alpha 1/0 -o " + (dir / "bad.csv")) == 2);
  CHECK(status("--help") == 0);
}
