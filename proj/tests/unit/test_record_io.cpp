#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "emwf/dynamics.hpp"
#include "emwf/error.hpp"
#include "emwf/record_io.hpp"
#include "emwf/states.hpp"

using namespace emwf;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("emwf_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TrajectoryRecord small_record() {
  const Grid g = make_grid(1, {20.0}, {64});
  EvolveOptions opt;
  opt.t_final = 0.1;
  opt.dt = 1e-2;
  opt.save_stride = 2;
  opt.scenario_hash = "abc";
  return evolve(gaussian_state(g, {}, {0.0}, {1.0}, {1.0}), *harmonic_potential(1.0), opt);
}

}  // namespace

TEST(FieldDump, ComplexRoundTrip) {
  const Grid g = make_grid(2, {10.0, 6.0}, {16, 8});
  const WaveFunction psi = gaussian_state(g, {}, {0.5, 0.0}, {1.0, -1.0}, {1.0, 1.0});
  const auto path = scratch("dump") / "psi.bin";
  write_field_dump(path, g, psi.values());
  EXPECT_EQ(std::filesystem::file_size(path), kDumpHeaderBytes + g.size() * 16);
  const FieldDump d = read_dump(path);
  EXPECT_EQ(d.grid, g);
  EXPECT_FALSE(d.real_valued);
  EXPECT_EQ(d.values, psi.values());
  std::ifstream in(path, std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  EXPECT_EQ(std::string(magic, 8), "EMWF0001");
}

TEST(FieldDump, RealRoundTripAndErrors) {
  const Grid g = make_grid(1, {10.0}, {16});
  RealField v(16);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.25 * static_cast<double>(i);
  const auto dir = scratch("dump_real");
  write_real_dump(dir / "v.bin", g, v);
  const FieldDump d = read_dump(dir / "v.bin");
  EXPECT_TRUE(d.real_valued);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(d.values[i].real(), v[i]);
  {
    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    bad << std::string(64, 'x');
  }
  EXPECT_THROW(read_dump(dir / "bad.bin"), InvalidArgument);
  const Grid big = make_grid(5, {1, 1, 1, 1, 1}, {8, 8, 8, 8, 8});
  EXPECT_THROW(write_field_dump(dir / "big.bin", big, ComplexField(big.size())), InvalidArgument);
}

TEST(RecordIo, WritesMetaAndExpectations) {
  const TrajectoryRecord rec = small_record();
  const auto dir = scratch("record");
  const auto files = write_record(rec, dir, {.snapshots = true});
  EXPECT_EQ(files.size(), 2 + rec.snapshots.size());
  const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
  EXPECT_EQ(meta["scenario_hash"], "abc");
  EXPECT_EQ(meta["steps"], 10);
  const std::string csv = slurp(dir / "expectations.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x0,p0,E");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(rec.size() + 1));
  EXPECT_TRUE(std::filesystem::exists(dir / "snapshots" / "snap_00000.bin"));
}

TEST(RecordIo, NumbersRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(RecordIo, MomentsCsvHasOneRowPerEntry) {
  const TrajectoryRecord rec = small_record();
  const auto sets = record_multipoles(rec, 2);
  std::vector<double> times;
  for (std::size_t i : rec.snapshot_index) times.push_back(rec.times[i]);
  const auto path = scratch("moments") / "moments.csv";
  write_moments_csv(path, times, sets);
  const std::string csv = slurp(path);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,alpha,value,kind");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(1 + sets.size() * 6));
  EXPECT_NE(csv.find(",momentum_0\n"), std::string::npos);
}

TEST(Record, ValidationAndThinning) {
  TrajectoryRecord rec = small_record();
  EXPECT_NO_THROW(rec.validate());
  EXPECT_NEAR(rec.uniform_stride(), 0.02, 1e-12);
  const TrajectoryRecord half = rec.thinned(2);
  EXPECT_EQ(half.size(), 3u);
  EXPECT_NEAR(half.uniform_stride(), 0.04, 1e-12);
  EXPECT_EQ(half.snapshots.size(), 3u);
  rec.times[2] = rec.times[1];
  EXPECT_THROW(rec.validate(), InvalidArgument);
  EXPECT_THROW(rec.uniform_stride(), InvalidArgument);
}
