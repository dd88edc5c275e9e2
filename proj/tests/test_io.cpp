#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "fluxrelax/diagnostics.hpp"
#include "fluxrelax/errors.hpp"
#include "fluxrelax/io.hpp"
#include "support.hpp"

using namespace fluxrelax;

namespace {

std::string what_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("device descriptions") {
  const DeviceModel d = io::parse_device_file(testing::data_path("devices/A1.json"));
  CHECK(d.qubit_id == "A1");
  CHECK(d.process_label == "A");
  CHECK(d.params.ej == doctest::Approx(3.54e9).epsilon(1e-15));
  CHECK(d.params.ec == doctest::Approx(1.05e9).epsilon(1e-15));
  CHECK(d.res.omega_res == doctest::Approx(7.09e9).epsilon(1e-15));
  CHECK(d.res.g == doctest::Approx(124e6).epsilon(1e-15));
  CHECK(d.res.kappa == doctest::Approx(0.25e6).epsilon(1e-15));
  CHECK(d.env.a_phi == doctest::Approx(10.4e-6 * 10.4e-6).epsilon(1e-14));
  CHECK(d.env.n_array == 151);

  SUBCASE("round trip") {
    const DeviceModel back = io::parse_device_json(io::device_to_json(d));
    CHECK(back.params.ej == d.params.ej);
    CHECK(back.params.el == d.params.el);
    CHECK(back.res.kappa == d.res.kappa);
    CHECK(back.env.a_phi == doctest::Approx(d.env.a_phi).epsilon(1e-15));
    CHECK(back.env.qc_eff == d.env.qc_eff);
  }
  SUBCASE("duplicate keys report their position") {
    const std::string text = "{\"qubit_id\": \"X\",\n  \"ej_ghz\": 3, \"ej_ghz\": 4}";
    const std::string msg = what_of([&] { io::parse_device_json(text, "dup.json"); });
    CHECK(contains(msg, "dup.json:2:"));
    CHECK(contains(msg, "ej_ghz"));
    CHECK_THROWS_AS(io::parse_device_json(text), DataError);
  }
  SUBCASE("unknown and missing keys") {
    std::string text = io::device_to_json(d);
    text.insert(1, "\"ej_hz\": 1,");
    const std::string msg = what_of([&] { io::parse_device_json(text); });
    CHECK(contains(msg, "ej_hz"));
    const std::string missing = what_of([] { io::parse_device_json(R"({"qubit_id": "X", "ej_ghz": 3})"); });
    CHECK(contains(missing, "ec_ghz"));
    CHECK(contains(missing, "kappa_mhz"));
    CHECK_THROWS_AS(io::parse_device_json(""), DataError);
    CHECK_THROWS_AS(io::parse_device_json("[]"), DataError);
  }
  SUBCASE("implausible values warn") {
    std::vector<std::string> seen;
    auto previous = set_warning_handler([&](const std::string& m) { seen.push_back(m); });
    std::string text = io::device_to_json(d);
    const auto at = text.find("\"ej_ghz\"");
    const auto comma = text.find(',', at);
    text.replace(at, comma - at, "\"ej_ghz\": 250.0");
    const DeviceModel odd = io::parse_device_json(text);
    set_warning_handler(previous);
    CHECK(odd.params.ej == doctest::Approx(250e9));
    CHECK_FALSE(seen.empty());
  }
}

TEST_CASE("T1 tables") {
  SUBCASE("bit-exact round trip") {
    T1Dataset ds{"B2", {}};
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 3; ++k) {
      T1Record r;
      r.phi_ext = u(rng);
      r.t1 = 1e-4 * u(rng);
      r.omega01 = 1e9 * u(rng);
      r.t1_err = r.t1 * 0.1 * u(rng);
      r.n_binned = static_cast<std::size_t>(k + 1);
      ds.records.push_back(r);
    }
    const io::T1Ingest back = io::parse_t1_csv(io::t1_to_csv(ds), "B2");
    REQUIRE(back.data.records.size() == 3);
    CHECK(back.dropped == 0);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back.data.records[i].phi_ext == ds.records[i].phi_ext);
      CHECK(back.data.records[i].t1 == ds.records[i].t1);
      CHECK(*back.data.records[i].omega01 == *ds.records[i].omega01);
      CHECK(*back.data.records[i].t1_err == *ds.records[i].t1_err);
      CHECK(back.data.records[i].n_binned == ds.records[i].n_binned);
    }
  }
  SUBCASE("ingest rule and optional columns") {
    const auto in = io::parse_t1_csv("phi_ext,t1_s,t1_err_s\n0.5,1e-4,3e-4\n0.4,1e-4,2e-4\n0.3,2e-4,\n", "q");
    CHECK(in.dropped == 1);
    REQUIRE(in.data.records.size() == 2);
    CHECK_FALSE(in.data.records[0].omega01.has_value());
    CHECK_FALSE(in.data.records[1].t1_err.has_value());
  }
  SUBCASE("comments, blank lines and column order") {
    const auto in = io::parse_t1_csv("# sweep\nt1_s,phi_ext\n\n1e-4,0.25\n", "q");
    REQUIRE(in.data.records.size() == 1);
    CHECK(in.data.records[0].phi_ext == 0.25);
  }
  SUBCASE("malformed rows name their line") {
    const std::string msg = what_of([] { io::parse_t1_csv("phi_ext,t1_s\n0.5,1e-4\n0.4,abc\n", "q", "t.csv"); });
    CHECK(contains(msg, "t.csv:3"));
    CHECK_THROWS_AS(io::parse_t1_csv("phi_ext,t1_s\n0.5,-1e-4\n", "q"), DataError);
    CHECK_THROWS_AS(io::parse_t1_csv("phi_ext,t1_s\n0.5\n", "q"), DataError);
    CHECK_THROWS_AS(io::parse_t1_csv("phi_ext,t1_s,bogus\n0.5,1e-4,1\n", "q"), DataError);
    CHECK_THROWS_AS(io::parse_t1_csv("phi_ext,phi_ext,t1_s\n0.5,0.5,1e-4\n", "q"), DataError);
    CHECK_THROWS_AS(io::parse_t1_csv("phi_ext\n0.5\n", "q"), DataError);
    CHECK_THROWS_AS(io::parse_t1_csv("phi_ext,t1_s\n", "q"), DataError);
  }
  SUBCASE("missing frequencies are filled from the device") {
    io::T1Ingest in = io::parse_t1_csv("phi_ext,t1_s\n0.5,1e-4\n", "A1");
    fill_frequencies(in.data, testing::device("A1").params);
    CHECK(*in.data.records[0].omega01 == doctest::Approx(0.362e9).epsilon(0.02));
  }
}

TEST_CASE("dephasing tables") {
  const auto ds = io::parse_dephasing_csv(
      "phi_ext,gamma_phi_e_per_s,slope_rad_per_s_per_phi0\n0.45,1200,2.1e10\n0.4,2500,\n", "B1");
  REQUIRE(ds.records.size() == 2);
  CHECK(ds.records[0].gamma_phi_e == 1200.0);
  CHECK(*ds.records[0].slope == 2.1e10);
  CHECK_FALSE(ds.records[1].slope.has_value());
  CHECK_THROWS_AS(io::parse_dephasing_csv("phi_ext\n0.4\n", "B1"), DataError);
}

TEST_CASE("distribution files") {
  QceffDistribution dist{"A3", 0.25, {{2.1e8, 2.2e5, 1, 0.45}, {1.3e9, 3.1e5, 3, 0.4}}};
  const std::string text = io::distribution_to_json(dist);
  CHECK(contains(text, "\"schema\": \"fluxrelax/v1\""));
  CHECK(contains(text, "qceff_distribution"));
  const QceffDistribution back = io::parse_distribution_json(text);
  CHECK(back.qubit_id == "A3");
  CHECK(back.epsilon_used == 0.25);
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[1].qceff == 3.1e5);
  CHECK(back.entries[1].n_binned == 3);
  CHECK(back.entries[0].phi_ext == 0.45);
  CHECK_THROWS_AS(io::parse_distribution_json(R"({"schema": "fluxrelax/v1", "kind": "device"})"), DataError);
}

TEST_CASE("CSV tokenizer") {
  const auto rows = io::parse_csv("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,2,3\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].fields[1] == "b,c");
  CHECK(rows[0].fields[2] == "say \"hi\"");
  CHECK(rows[1].line == 2);
  CHECK(rows[1].fields[2] == "3");
  CHECK_THROWS_AS(io::parse_csv("a,\"open\n"), DataError);
}

TEST_CASE("numbers, hashes and files") {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(io::fnv1a_hex("a") == "af63dc4c8601ec8c");

  const auto dir = std::filesystem::temp_directory_path() / "fluxrelax_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.txt";
  io::write_file_atomic(path, "first");
  io::write_file_atomic(path, "second");
  CHECK(io::read_file(path) == "second");
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(io::read_file(dir / "missing"), DataError);
}
