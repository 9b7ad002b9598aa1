#pragma once

// Output formats.
//
// Diagnostics CSV (version 1): a comment line
//   # rodflow-diagnostics v1 config_hash=<16 hex digits>
// followed by a fixed header row and one row per cadence tick; numbers are
// written with 17 significant digits so reruns are byte-identical.
//
// Snapshot (version 1), little or big endian as written, self-describing:
//   char[8]  magic "RFSNAP\0\0"
//   u8       format version
//   u32      endianness marker 0x01020304 in writer byte order
//   u64      config hash
//   u64      step
//   f64      t
//   u32 x 6  n_r, n_theta, n_phi, nx, ny, nz
//   f64      r_max
//   f64      alpha
//   f64[]    psi, (y, eta, r) order with r fastest
//   f64[]    phi, one per spatial node

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rodflow/diagnostics.hpp"
#include "rodflow/error.hpp"

namespace rodflow {

inline constexpr int kCsvVersion = 1;
inline constexpr std::uint8_t kSnapshotVersion = 1;
inline constexpr std::array<char, 8> kSnapshotMagic{'R', 'F', 'S', 'N', 'A', 'P', '\0', '\0'};
inline constexpr std::uint32_t kEndianMarker = 0x01020304u;

inline const char* csv_columns() {
  return "step,t,total_mass,monomer_total,polymer_mass,polymer_count,S_xx,S_yy,S_zz,S_xy,S_xz,"
         "S_yz,envelope_margin,Cn,psi_energy_lhs,psi_energy_bound,phi_energy_lhs,phi_energy_bound,"
         "psi_min,phi_min,phi_max";
}

inline std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

inline std::string csv_preamble(std::uint64_t hash) {
  return "# rodflow-diagnostics v" + std::to_string(kCsvVersion) + " config_hash=" + hash_hex(hash) +
         "\n" + csv_columns() + "\n";
}

inline std::string csv_row(const DiagnosticsRecord& r) {
  std::string out = std::to_string(r.step);
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out += buf;
  };
  put(r.t);
  put(r.total_mass);
  put(r.monomer_total);
  put(r.polymer_mass);
  put(r.polymer_count);
  put(r.stress(0, 0));
  put(r.stress(1, 1));
  put(r.stress(2, 2));
  put(r.stress(0, 1));
  put(r.stress(0, 2));
  put(r.stress(1, 2));
  put(r.envelope_margin);
  put(r.cn);
  put(r.psi_energy_lhs);
  put(r.psi_energy_bound);
  put(r.phi_energy_lhs);
  put(r.phi_energy_bound);
  put(r.psi_min);
  put(r.phi_min);
  put(r.phi_max);
  return out + "\n";
}

/// Append-only diagnostics writer.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::uint64_t hash) : out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorKind::FormatError, "cannot open " + path.string());
    out_ << csv_preamble(hash);
  }
  void write(const DiagnosticsRecord& r) {
    out_ << csv_row(r);
    out_.flush();
  }

 private:
  std::ofstream out_;
};

/// Reads the config hash from a diagnostics CSV preamble.
inline std::uint64_t read_csv_hash(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::FormatError, "empty diagnostics file");
  const std::string prefix = "# rodflow-diagnostics v";
  if (line.rfind(prefix, 0) != 0) throw Error(ErrorKind::FormatError, "missing diagnostics preamble");
  const auto pos = line.find("config_hash=");
  if (pos == std::string::npos) throw Error(ErrorKind::FormatError, "missing config hash");
  return std::stoull(line.substr(pos + 12), nullptr, 16);
}

struct Snapshot {
  std::uint64_t hash = 0;
  std::uint64_t step = 0;
  double t = 0.0;
  std::array<std::uint32_t, 6> dims{};  // n_r, n_theta, n_phi, nx, ny, nz
  double r_max = 0.0;
  double alpha = 0.0;
  std::vector<double> psi;
  std::vector<double> phi;
};

namespace detail {

template <class T>
void put_raw(std::string& buf, const T& v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <class T>
T byteswap_value(T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  template <class T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw Error(ErrorKind::FormatError, "snapshot truncated");
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return swap_ ? byteswap_value(v) : v;
  }
  void set_swap(bool s) { swap_ = s; }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::size_t pos_ = 0;
  bool swap_ = false;
};

}  // namespace detail

inline std::string encode_snapshot(const Snapshot& s) {
  std::string buf(kSnapshotMagic.data(), kSnapshotMagic.size());
  detail::put_raw(buf, kSnapshotVersion);
  detail::put_raw(buf, kEndianMarker);
  detail::put_raw(buf, s.hash);
  detail::put_raw(buf, s.step);
  detail::put_raw(buf, s.t);
  for (auto d : s.dims) detail::put_raw(buf, d);
  detail::put_raw(buf, s.r_max);
  detail::put_raw(buf, s.alpha);
  for (double v : s.psi) detail::put_raw(buf, v);
  for (double v : s.phi) detail::put_raw(buf, v);
  return buf;
}

inline Snapshot decode_snapshot(std::string data) {
  if (data.size() < kSnapshotMagic.size() ||
      std::memcmp(data.data(), kSnapshotMagic.data(), kSnapshotMagic.size()) != 0)
    throw Error(ErrorKind::FormatError, "not a rodflow snapshot");
  detail::Reader rd(data.substr(kSnapshotMagic.size()));
  const auto version = rd.get<std::uint8_t>();
  if (version != kSnapshotVersion)
    throw Error(ErrorKind::FormatError, "unsupported snapshot version " + std::to_string(version));
  const auto marker = rd.get<std::uint32_t>();
  if (marker == detail::byteswap_value(kEndianMarker))
    rd.set_swap(true);
  else if (marker != kEndianMarker)
    throw Error(ErrorKind::FormatError, "bad endianness marker");
  Snapshot s;
  s.hash = rd.get<std::uint64_t>();
  s.step = rd.get<std::uint64_t>();
  s.t = rd.get<double>();
  for (auto& d : s.dims) d = rd.get<std::uint32_t>();
  s.r_max = rd.get<double>();
  s.alpha = rd.get<double>();
  const std::size_t n_space = std::size_t{s.dims[3]} * s.dims[4] * s.dims[5];
  const std::size_t n_psi = std::size_t{s.dims[0]} * s.dims[1] * s.dims[2] * n_space;
  s.psi.resize(n_psi);
  for (auto& v : s.psi) v = rd.get<double>();
  s.phi.resize(n_space);
  for (auto& v : s.phi) v = rd.get<double>();
  if (!rd.at_end()) throw Error(ErrorKind::FormatError, "trailing bytes in snapshot");
  return s;
}

inline void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::FormatError, "cannot open " + path.string());
  const auto bytes = encode_snapshot(s);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::FormatError, "short write to " + path.string());
}

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FormatError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_snapshot(ss.str());
}

inline Snapshot make_snapshot(std::uint64_t hash, long step, double t, const PolymerField& psi,
                              const MonomerField& phi, const Discretization& d) {
  Snapshot s;
  s.hash = hash;
  s.step = static_cast<std::uint64_t>(step);
  s.t = t;
  const auto& sp = d.space;
  s.dims = {static_cast<std::uint32_t>(d.n_r()), static_cast<std::uint32_t>(d.sphere.n_theta),
            static_cast<std::uint32_t>(d.sphere.n_phi), static_cast<std::uint32_t>(sp.n[0]),
            static_cast<std::uint32_t>(sp.n[1]), static_cast<std::uint32_t>(sp.n[2])};
  s.r_max = d.length.r_max;
  s.alpha = d.length.alpha;
  s.psi = psi.values;
  s.phi = phi.values;
  return s;
}

/// Largest absolute difference between two snapshots of the same run
/// configuration; snapshots from different configurations are rejected.
inline double compare_snapshots(const Snapshot& a, const Snapshot& b) {
  if (a.hash != b.hash)
    throw Error(ErrorKind::ProvenanceMismatch,
                "snapshots come from configs " + hash_hex(a.hash) + " and " + hash_hex(b.hash));
  if (a.dims != b.dims) throw Error(ErrorKind::ProvenanceMismatch, "snapshot grids differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.psi.size(); ++k) worst = std::max(worst, std::abs(a.psi[k] - b.psi[k]));
  for (std::size_t k = 0; k < a.phi.size(); ++k) worst = std::max(worst, std::abs(a.phi[k] - b.phi[k]));
  return worst;
}

/// Rejects comparison of diagnostics files with different provenance.
inline void require_same_provenance(const std::filesystem::path& a, const std::filesystem::path& b) {
  const auto ha = read_csv_hash(a);
  const auto hb = read_csv_hash(b);
  if (ha != hb)
    throw Error(ErrorKind::ProvenanceMismatch,
                "diagnostics come from configs " + hash_hex(ha) + " and " + hash_hex(hb));
}

}  // namespace rodflow
