#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = LAMBDAMEM_CLI_PATH;
const std::string kData = LAMBDAMEM_DATA_DIR;

int run(const std::string& args, const std::string& log = "/dev/null") {
  const std::string cmd = kCli + " " + args + " >" + log + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("lambdamem_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

} // namespace

TEST_CASE("--help exits 0 and documents units") {
  auto dir = fresh_dir("help");
  const auto log = dir / "help.txt";
  CHECK(run("--help", log.string()) == 0);
  CHECK(run("simulate ats --help", (dir / "h2.txt").string()) == 0);
  const std::string h2 = slurp(dir / "h2.txt");
  CHECK(h2.find("(Hz)") != std::string::npos);
  CHECK(h2.find("(s)") != std::string::npos);
}

TEST_CASE("cavity asymptotic headline value") {
  auto dir = fresh_dir("cav");
  REQUIRE(run("simulate cavity --c 10 --asymptotic --output " +
              dir.string()) == 0);
  const std::string csv = slurp(dir / "results.csv");
  CHECK(csv.find("0.826446280992") != std::string::npos);
  CHECK(csv.find("# config:") != std::string::npos);
}

TEST_CASE("transduce defaults and validation") {
  auto dir = fresh_dir("td");
  const auto log = dir / "out.txt";
  REQUIRE(run("transduce --output " + dir.string(), log.string()) == 0);
  const std::string out = slurp(log);
  CHECK(out.find("n_th = 0.0045") != std::string::npos);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(run("transduce --eta-m 1.5 --output " + dir.string()) == 2);
  CHECK(run("transduce --c-s 10 --c-r 10 --eta-m 1 --output " + dir.string(),
            log.string()) == 0);
  CHECK(slurp(log).find("efficiency = 0.826446") != std::string::npos);
}

TEST_CASE("ats sweep is deterministic byte for byte") {
  auto d1 = fresh_dir("ats1");
  auto d2 = fresh_dir("ats2");
  const std::string flags =
      " simulate ats --d 27 --f-min 2 --f-max 6 --steps 5 --seed 7 --output ";
  REQUIRE(run(flags + d1.string()) == 0);
  REQUIRE(run(flags + d2.string()) == 0);
  CHECK(slurp(d1 / "results.csv") == slurp(d2 / "results.csv"));
}

TEST_CASE("config file values apply and flags win") {
  auto dir = fresh_dir("cfg");
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << "{\"d\": 5, \"direction\": \"forward\"}\n";
  REQUIRE(run("simulate ats --config " + cfg.string() + " --f 3 --d 27 "
              "--output " + dir.string()) == 0);
  const std::string csv = slurp(dir / "results.csv");
  CHECK(csv.find("\"d\":27.0") != std::string::npos);     // flag beat config
  CHECK(csv.find("\"direction\":\"forward\"") != std::string::npos);
}

TEST_CASE("config errors exit 2") {
  auto dir = fresh_dir("cfgbad");
  const auto bad = dir / "bad.json";
  std::ofstream(bad) << "{\"no-such-flag\": 1}\n";
  CHECK(run("simulate ats --config " + bad.string() + " --output " +
            dir.string()) == 2);
  const auto empty = dir / "empty.json";
  std::ofstream(empty) << "{\"sweep\": {\"param\": \"f\", \"values\": []}}\n";
  CHECK(run("simulate ats --config " + empty.string() + " --output " +
            dir.string()) == 2);
  const auto badsweep = dir / "sw.json";
  std::ofstream(badsweep)
      << "{\"sweep\": {\"param\": \"zork\", \"values\": [1]}}\n";
  CHECK(run("simulate ats --config " + badsweep.string() + " --output " +
            dir.string()) == 2);
}

TEST_CASE("fit pipeline on the bundled data") {
  auto dir = fresh_dir("fit");
  REQUIRE(run("fit od --input " + kData + "/absorption_dip.csv "
              "--true-fwhm 56e6 --length-cm 0.5 --finesse 1000 --output " +
              dir.string()) == 0);
  const std::string od = slurp(dir / "od.json");
  CHECK(od.find("\"optical_depth\": 0.00934") != std::string::npos);
  CHECK(fs::exists(dir / "corrected.csv"));

  REQUIRE(run("fit concentration --input " + kData +
              "/alpha_spectrum.csv --eta-r 1 --output " + dir.string()) == 0);
  const std::string fj = slurp(dir / "fit.json");
  CHECK(fj.find("concentration_invcm3") != std::string::npos);
  CHECK(fj.find("input_hash") != std::string::npos);

  REQUIRE(run("fit split --corpus " + kData + "/at_corpus.json --output " +
              dir.string()) == 0);
  const std::string sp = slurp(dir / "splittings.csv");
  CHECK(sp.find("slope_vs_omega") != std::string::npos);

  REQUIRE(run("fit cpt --input " + kData + "/cpt_example.csv --dips 2 "
              "--output " + dir.string()) == 0);
}

TEST_CASE("malformed input exits 2, flat input exits 4") {
  auto dir = fresh_dir("badinput");
  const auto bad = dir / "bad.csv";
  std::ofstream(bad) << "frequency;value\n1;2\n";
  CHECK(run("fit line --input " + bad.string() + " --output " +
            dir.string()) == 2);
  const auto flat = dir / "flat.csv";
  {
    std::ofstream f(flat);
    f << "axis_hz,value_counts\n";
    for (int i = 0; i < 32; ++i) f << i * 1.0 << ",0.5\n";
  }
  CHECK(run("fit line --input " + flat.string() + " --output " +
            dir.string()) == 4);
}

TEST_CASE("synth regenerates the bundled corpus byte for byte") {
  auto dir = fresh_dir("synthregen");
  REQUIRE(run("synth at-corpus --seed 20260810 --count 6 --output " +
              dir.string()) == 0);
  CHECK(slurp(dir / "at_00.csv") == slurp(fs::path(kData) / "at_00.csv"));
  CHECK(slurp(dir / "at_corpus.json") ==
        slurp(fs::path(kData) / "at_corpus.json"));
  REQUIRE(run("synth cpt --seed 20260810 --output " + dir.string()) == 0);
  CHECK(slurp(dir / "cpt_example.csv") ==
        slurp(fs::path(kData) / "cpt_example.csv"));
}

TEST_CASE("eit emits warnings column and svg on sweep") {
  auto dir = fresh_dir("eitcli");
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg)
      << "{\"sweep\": {\"param\": \"d\", \"values\": [1, 5]}}\n";
  REQUIRE(run("simulate eit --config " + cfg.string() +
              " --no-refine --emit-plots --output " + dir.string()) == 0);
  const std::string csv = slurp(dir / "results.csv");
  CHECK(csv.find("d <= 20") != std::string::npos);
  CHECK(fs::exists(dir / "efficiency.svg"));
}

TEST_CASE("fit split on a single bundled file") {
  auto dir = fresh_dir("split1");
  REQUIRE(run("fit split --input " + kData + "/at_02.csv --output " +
              dir.string()) == 0);
  const std::string fj = slurp(dir / "fit.json");
  CHECK(fj.find("splitting") != std::string::npos);
}
