#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fluxrelax/cli.hpp"
#include "fluxrelax/io.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace fluxrelax;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  std::filesystem::path path;
  TempDir() : path(std::filesystem::temp_directory_path() / "fluxrelax_cli_test") {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name, const std::string& contents) const {
    const auto p = path / name;
    io::write_file_atomic(p, contents);
    return p.string();
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string device(const char* id) { return testing::data_path(std::string("devices/") + id + ".json"); }

std::string sweep_csv(double t1) {
  std::ostringstream s;
  s << "phi_ext,t1_s\n";
  for (double phi : {0.5, 0.46, 0.42, 0.38, 0.34}) s << phi << ',' << t1 << '\n';
  return s.str();
}

}  // namespace

TEST_CASE("spectrum command") {
  const Run r = run({"spectrum", "--device", device("A1"), "--flux", "0.5", "--levels", "2"});
  REQUIRE(r.code == 0);
  const auto rows = io::parse_csv(r.out);
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0].fields[0] == "phi_ext");
  CHECK(rows[0].fields[5] == "freq_ij_hz");
  bool found = false;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].fields[1] == "0" && rows[k].fields[2] == "1") {
      CHECK(std::stod(rows[k].fields[5]) == doctest::Approx(0.362e9).epsilon(0.02));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("predicted data inverts back to its quality factor") {
  TempDir tmp;
  const std::string data = tmp / "a1.csv";
  const Run p = run({"predict-t1", "--device", device("A1"), "--flux", "0.5,0.45,0.4,0.32", "--qc-eff", "2.5e5",
                     "--as-dataset", "-o", data});
  REQUIRE(p.code == 0);
  const Run e = run({"extract-qceff", "--device", device("A1"), "--data", data, "--bin-width-hz", "0",
                     "--exclusion-threshold", "1e9"});
  REQUIRE(e.code == 0);
  const QceffDistribution dist = io::parse_distribution_json(e.out);
  CHECK(dist.qubit_id == "A1");
  REQUIRE_FALSE(dist.entries.empty());
  for (const auto& entry : dist.entries) CHECK(entry.qceff == doctest::Approx(2.5e5).epsilon(1e-3));
}

TEST_CASE("compare command") {
  TempDir tmp;
  const std::string a = tmp.file("a.json", io::distribution_to_json({"qa", 0.25, {{1e8, 2e5, 1, 0.5}, {2e8, 3e5, 1, 0.45}, {3e8, 2.6e5, 1, 0.4}}}));
  const std::string b = tmp.file("b.json", io::distribution_to_json({"qb", 0.25, {{1e8, 2e5, 1, 0.5}, {2e8, 3e5, 1, 0.45}, {3e8, 2.6e5, 1, 0.4}}}));
  const Run r = run({"compare", "--dist", a, "--dist", b});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["kind"] == "welch_matrix");
  REQUIRE(j["pairs"].size() == 2);
  for (const auto& pair : j["pairs"]) {
    CHECK(pair["p_value"].get<double>() == 1.0);
    CHECK(pair["t0"].get<double>() == 0.0);
  }

  const std::string flat = tmp.file("flat.json", io::distribution_to_json({"qf", 0.25, {{1e8, 2e5, 1, 0.5}, {2e8, 2e5, 1, 0.4}}}));
  const Run z = run({"compare", "--dist", flat, "--dist", flat});
  CHECK(z.code == 3);
}

TEST_CASE("exit codes and error reports") {
  CHECK(run({}).code == 1);
  CHECK(run({"no-such-command"}).code == 1);
  CHECK(run({"spectrum"}).code == 1);
  CHECK(run({"--help"}).code == 0);

  const Run missing = run({"spectrum", "--device", "/nonexistent/device.json", "--flux", "0.5"});
  CHECK(missing.code == 2);
  const auto brace = missing.err.find('{');
  REQUIRE(brace != std::string::npos);
  const json report = json::parse(missing.err.substr(brace));
  CHECK(report["schema"] == "fluxrelax/v1");
  CHECK(report["kind"] == "error");
  CHECK(report["exit_code"] == 2);

  TempDir tmp;
  const std::string bad = tmp.file("bad.json", R"({"qubit_id": "X", "ej_ghz": 3.5, "ej_ghz": 3.6})");
  CHECK(run({"spectrum", "--device", bad, "--flux", "0.5"}).code == 2);
}

TEST_CASE("report command is deterministic") {
  TempDir tmp;
  const std::string a1 = tmp.file("A1.csv", sweep_csv(1.2e-4));
  const std::string b2 = tmp.file("B2.csv", sweep_csv(0.9e-4));
  const std::vector<std::string> args = {"report", "--device", device("A1"), "--data", a1,
                                         "--device", device("B2"), "--data", b2, "--bin-width-hz", "0",
                                         "--mode", "two_level"};
  const Run first = run(args);
  const Run second = run(args);
  REQUIRE(first.code == 0);
  CHECK(first.out == second.out);
  const json j = json::parse(first.out);
  CHECK(j["kind"] == "report");
  CHECK(j.contains("provenance"));
}
