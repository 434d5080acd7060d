#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "adnet/io/io.hpp"
#include "adnet/rng.hpp"
#include "adnet/sim/simulate.hpp"
#include "models.hpp"

using namespace adnet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("adnet_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("doubles round-trip bit-exactly") {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.index(200)) - 100);
    CHECK(io::parse_double(io::format_double(v)) == v);
  }
  CHECK(io::parse_double(io::format_double(0.1)) == 0.1);
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::parse_double(io::format_double(std::numeric_limits<double>::denorm_min())) ==
        std::numeric_limits<double>::denorm_min());
  CHECK_THROWS_AS(io::parse_double("1.5x"), Error);
}

TEST_CASE("SHA-256 known answers") {
  CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("CSV writer and reader") {
  const fs::path dir = scratch("csv");
  {
    io::CsvWriter w(dir / "t.csv", "test.v1", {"a", "b"}, io::Json{{"k", 3}});
    w.row({"1", "x"});
    w.row({"2", "y"});
    CHECK_THROWS_AS(w.row({"only one"}), Error);
  }
  const io::CsvTable t = io::read_csv(dir / "t.csv");
  CHECK(t.schema == "test.v1");
  CHECK(t.meta["k"] == 3);
  CHECK(t.columns == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][t.column("b")] == "y");
  CHECK_THROWS_AS(t.column("c"), Error);
}

TEST_CASE("event logs round-trip in both formats") {
  const ValidatedModel m = testmodels::from_text(testmodels::general());
  const auto pos = m.domain.default_positions(20);
  const SimResult r = simulate_network(m, 20, pos, 1.0, 3);
  REQUIRE(!r.log.events.empty());
  const fs::path dir = scratch("log");
  io::write_event_log_csv(dir / "events.csv", r.log);
  io::write_event_log_binary(dir / "events.bin", r.log);
  CHECK(io::read_event_log_csv(dir / "events.csv") == r.log);
  CHECK(io::read_event_log_binary(dir / "events.bin") == r.log);
  CHECK(fs::file_size(dir / "events.bin") == 8 + 4 + 8 + 20 * r.log.events.size());
  // Header bytes.
  std::ifstream in(dir / "events.bin", std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  CHECK(std::string(magic, 8) == "ADNETLOG");
  // A truncated file is rejected.
  fs::resize_file(dir / "events.bin", fs::file_size(dir / "events.bin") - 3);
  CHECK_THROWS_AS(io::read_event_log_binary(dir / "events.bin"), Error);
}

TEST_CASE("measure CSV round-trips exactly") {
  MeasureSample mu;
  mu.horizon = 1.0 / 3.0;
  mu.generation = 4;
  mu.seed = 0xdeadbeefcafeULL;
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    TrajectoryPath p{static_cast<State>(i % 2), {}, mu.horizon};
    double t = 0.0;
    for (int k = 0; k < i % 4; ++k) {
      t += rng.uniform() * mu.horizon / 8.0;
      p.push(t, static_cast<State>(1 - p.at(t)));
    }
    mu.particles.push_back({{rng.uniform(), 0.0}, p, 0.1});
  }
  const fs::path dir = scratch("measure");
  io::write_measure_csv(dir / "mu.csv", mu);
  CHECK(io::read_measure_csv(dir / "mu.csv") == mu);
}

TEST_CASE("manifest lists every artifact deterministically") {
  const fs::path dir = scratch("manifest");
  fs::create_directories(dir / "sub");
  std::ofstream(dir / "b.txt") << "abc";
  std::ofstream(dir / "sub" / "a.txt") << "";
  const io::Json plan{{"mode", "simulate"}};
  const io::Json m1 = io::write_manifest(dir, plan);
  const io::Json m2 = io::write_manifest(dir, plan);
  CHECK(m1 == m2);
  CHECK(m1["schema"] == "adnet.manifest.v1");
  REQUIRE(m1["files"].size() == 2);
  CHECK(m1["files"][0]["path"] == "b.txt");
  CHECK(m1["files"][0]["sha256"] == io::sha256_hex("abc"));
  CHECK(m1["files"][0]["bytes"] == 3);
  CHECK(m1["files"][1]["path"] == "sub/a.txt");
  CHECK(io::read_json(dir / "manifest.json") == m1);
}
