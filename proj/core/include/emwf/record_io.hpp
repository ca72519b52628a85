#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "emwf/grid.hpp"
#include "emwf/moments.hpp"
#include "emwf/record.hpp"

namespace emwf {

// Binary field dump: 64-byte little-endian header (magic "EMWF0001", u32 dims,
// u32 flags, u32 N[4], f64 L[4]) followed by row-major samples. Complex fields
// store interleaved re/im doubles; flag bit 0 marks real-valued data.
inline constexpr char kDumpMagic[8] = {'E', 'M', 'W', 'F', '0', '0', '0', '1'};
inline constexpr std::size_t kDumpHeaderBytes = 64;
inline constexpr std::size_t kDumpMaxDims = 4;

void write_field_dump(const std::filesystem::path& path, const Grid& grid, std::span<const Complex> values);
void write_real_dump(const std::filesystem::path& path, const Grid& grid, std::span<const double> values);

struct FieldDump {
  Grid grid;
  bool real_valued = false;
  ComplexField values;
};
FieldDump read_dump(const std::filesystem::path& path);

// Shortest round-trip representation used by every CSV writer.
std::string format_number(double v);

struct RecordWriteOptions {
  bool snapshots = false;
};

// meta.json and expectations.csv (t, x.., p.., E), plus snapshot dumps
// snapshots/snap_00000.bin when requested. Returns the written paths.
std::vector<std::filesystem::path> write_record(const TrajectoryRecord& record, const std::filesystem::path& dir,
                                                const RecordWriteOptions& options = {});

// Rows t, alpha, value, kind with kind in {density, momentum_r, pair_c_a}.
void write_moments_csv(const std::filesystem::path& path, const std::vector<double>& times,
                       const std::vector<MultipoleSet>& sets);

}  // namespace emwf
