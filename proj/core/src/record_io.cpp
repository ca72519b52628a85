#include "emwf/record_io.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "emwf/error.hpp"

namespace emwf {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

const WaveFunction* TrajectoryRecord::snapshot_at(std::size_t i) const {
  for (std::size_t s = 0; s < snapshot_index.size(); ++s)
    if (snapshot_index[s] == i) return &snapshots[s];
  return nullptr;
}

double TrajectoryRecord::uniform_stride(double rel_tol) const {
  if (times.size() < 2) throw InvalidArgument("record has fewer than two saved times");
  const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - times[i - 1] - h) > rel_tol * h + 1e-13 * std::abs(times[i]))
      throw InvalidArgument("saved times are not uniformly spaced");
  return h;
}

TrajectoryRecord TrajectoryRecord::thinned(std::size_t k) const {
  if (k == 0) throw InvalidArgument("thinning factor must be positive");
  TrajectoryRecord out;
  out.meta = meta;
  out.units = units;
  out.meta.save_stride = meta.save_stride * k;
  for (std::size_t i = 0; i < times.size(); i += k) {
    out.times.push_back(times[i]);
    out.position.push_back(position[i]);
    out.momentum.push_back(momentum[i]);
    out.force.push_back(force[i]);
    out.energy.push_back(energy[i]);
    out.norm.push_back(norm[i]);
    if (const WaveFunction* s = snapshot_at(i)) {
      out.snapshot_index.push_back(out.times.size() - 1);
      out.snapshots.push_back(*s);
    }
  }
  return out;
}

void TrajectoryRecord::validate() const {
  const std::size_t n = times.size();
  if (position.size() != n || momentum.size() != n || force.size() != n || energy.size() != n || norm.size() != n)
    throw InvalidArgument("record arrays have inconsistent lengths");
  if (snapshots.size() != snapshot_index.size()) throw InvalidArgument("snapshot index does not match snapshots");
  for (std::size_t i = 1; i < n; ++i)
    if (!(times[i] > times[i - 1])) throw InvalidArgument("record times are not strictly increasing");
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    if (snapshot_index[s] >= n) throw InvalidArgument("snapshot index out of range");
    if (std::abs(snapshots[s].squared_norm() - 1.0) > 1e-8) throw InvalidArgument("snapshot is not normalized");
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_header(std::ofstream& out, const Grid& grid, std::uint32_t flags) {
  if (grid.dims() > kDumpMaxDims) throw InvalidArgument("binary dumps support at most 4 axes");
  unsigned char header[kDumpHeaderBytes] = {};
  std::memcpy(header, kDumpMagic, 8);
  const auto dims = static_cast<std::uint32_t>(grid.dims());
  std::memcpy(header + 8, &dims, 4);
  std::memcpy(header + 12, &flags, 4);
  for (std::size_t a = 0; a < grid.dims(); ++a) {
    const auto n = static_cast<std::uint32_t>(grid.points(a));
    const double l = grid.extent(a);
    std::memcpy(header + 16 + 4 * a, &n, 4);
    std::memcpy(header + 32 + 8 * a, &l, 8);
  }
  out.write(reinterpret_cast<const char*>(header), kDumpHeaderBytes);
}

std::ofstream open_binary(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  return out;
}

std::ofstream open_text(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_field_dump(const std::filesystem::path& path, const Grid& grid, std::span<const Complex> values) {
  if (values.size() != grid.size()) throw InvalidArgument("field does not match grid");
  auto out = open_binary(path);
  write_header(out, grid, 0);
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

void write_real_dump(const std::filesystem::path& path, const Grid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw InvalidArgument("field does not match grid");
  auto out = open_binary(path);
  write_header(out, grid, 1);
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

FieldDump read_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  unsigned char header[kDumpHeaderBytes];
  if (!in.read(reinterpret_cast<char*>(header), kDumpHeaderBytes)) throw InvalidArgument("truncated dump header");
  if (std::memcmp(header, kDumpMagic, 8) != 0) throw InvalidArgument("not an EMWF dump: bad magic");
  std::uint32_t dims = 0, flags = 0;
  std::memcpy(&dims, header + 8, 4);
  std::memcpy(&flags, header + 12, 4);
  if (dims == 0 || dims > kDumpMaxDims) throw InvalidArgument("dump has unsupported dimension count");
  std::vector<std::size_t> n(dims);
  std::vector<double> l(dims);
  for (std::size_t a = 0; a < dims; ++a) {
    std::uint32_t na = 0;
    std::memcpy(&na, header + 16 + 4 * a, 4);
    std::memcpy(&l[a], header + 32 + 8 * a, 8);
    n[a] = na;
  }
  FieldDump dump{Grid(l, n), (flags & 1u) != 0, {}};
  dump.values.resize(dump.grid.size());
  if (dump.real_valued) {
    std::vector<double> re(dump.grid.size());
    if (!in.read(reinterpret_cast<char*>(re.data()), static_cast<std::streamsize>(re.size() * sizeof(double))))
      throw InvalidArgument("truncated dump payload");
    for (std::size_t i = 0; i < re.size(); ++i) dump.values[i] = re[i];
  } else if (!in.read(reinterpret_cast<char*>(dump.values.data()),
                      static_cast<std::streamsize>(dump.values.size() * sizeof(Complex)))) {
    throw InvalidArgument("truncated dump payload");
  }
  return dump;
}

std::vector<std::filesystem::path> write_record(const TrajectoryRecord& record, const std::filesystem::path& dir,
                                                const RecordWriteOptions& options) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  nlohmann::ordered_json meta;
  meta["scenario_hash"] = record.meta.scenario_hash;
  meta["integrator"] = record.meta.integrator;
  meta["potential"] = record.meta.potential;
  meta["dt"] = record.meta.dt;
  meta["t_final"] = record.meta.t_final;
  meta["steps"] = record.meta.steps;
  meta["save_stride"] = record.meta.save_stride;
  meta["snapshot_every"] = record.meta.snapshot_every;
  meta["saved_times"] = record.times.size();
  meta["units"] = {{"hbar", record.units.hbar}, {"masses", record.units.masses}};
  if (record.units.c) meta["units"]["c"] = *record.units.c;
  if (!record.snapshots.empty()) {
    const Grid& g = record.snapshots.front().grid();
    meta["grid"] = {{"extents", g.extents()}, {"points", g.shape()}};
  }
  for (const auto& [k, v] : record.meta.extra) meta["extra"][k] = v;
  {
    auto out = open_text(dir / "meta.json");
    out << meta.dump(2) << '\n';
    written.push_back(dir / "meta.json");
  }
  {
    auto out = open_text(dir / "expectations.csv");
    const std::size_t d = record.dims();
    out << "t";
    for (std::size_t a = 0; a < d; ++a) out << ",x" << a;
    for (std::size_t a = 0; a < d; ++a) out << ",p" << a;
    out << ",E\n";
    for (std::size_t i = 0; i < record.size(); ++i) {
      out << format_number(record.times[i]);
      for (double v : record.position[i]) out << ',' << format_number(v);
      for (double v : record.momentum[i]) out << ',' << format_number(v);
      out << ',' << format_number(record.energy[i]) << '\n';
    }
    written.push_back(dir / "expectations.csv");
  }
  if (options.snapshots) {
    for (std::size_t s = 0; s < record.snapshots.size(); ++s) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%05zu.bin", s);
      const auto path = dir / "snapshots" / name;
      write_field_dump(path, record.snapshots[s].grid(), record.snapshots[s].values());
      written.push_back(path);
    }
  }
  return written;
}

void write_moments_csv(const std::filesystem::path& path, const std::vector<double>& times,
                       const std::vector<MultipoleSet>& sets) {
  if (times.size() != sets.size()) throw InvalidArgument("moment sets and times differ in length");
  auto out = open_text(path);
  out << "t,alpha,value,kind\n";
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const std::string t = format_number(times[i]);
    for (const auto& [alpha, v] : sets[i].density_moments)
      out << t << ',' << to_string(alpha) << ',' << format_number(v) << ",density\n";
    for (const auto& [key, v] : sets[i].momentum_moments)
      out << t << ',' << to_string(key.second) << ',' << format_number(v) << ",momentum_" << key.first << '\n';
    if (sets[i].pair_moments) {
      for (const auto& [key, v] : *sets[i].pair_moments) {
        const int c = order(key.conj) + order(key.psi);
        const std::string alpha = to_string(key.conj) + "|" + to_string(key.psi) + "|" + to_string(key.position);
        out << t << ',' << alpha << ',' << format_number(v.real()) << ",pair_" << c << '_' << order(key.psi)
            << "_re\n";
        out << t << ',' << alpha << ',' << format_number(v.imag()) << ",pair_" << c << '_' << order(key.psi)
            << "_im\n";
      }
    }
  }
}

}  // namespace emwf
