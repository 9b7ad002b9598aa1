#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "support.hpp"

using namespace rodflow;
using rodflow::testing::homogeneous_config;
using rodflow::testing::scratch_dir;
using rodflow::testing::slurp;

namespace {

ErrorKind config_error(const nlohmann::json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::FormatError;
}

Snapshot sample_snapshot() {
  Snapshot s;
  s.hash = 0x0123456789abcdefULL;
  s.step = 42;
  s.t = 0.42;
  s.dims = {3, 2, 4, 1, 1, 1};
  s.r_max = 30.0;
  s.alpha = 1.0;
  s.psi.resize(3 * 2 * 4);
  for (std::size_t k = 0; k < s.psi.size(); ++k) s.psi[k] = 0.125 * static_cast<double>(k) - 1.0;
  s.phi = {0.75};
  return s;
}

}  // namespace

TEST(Config, ShortTruncationRejected) {
  auto j = homogeneous_config();
  j["grid"]["r_max"] = 20.0;
  EXPECT_EQ(config_error(j), ErrorKind::InvalidConfig);
}

TEST(Config, StepMustDivideHorizon) {
  auto j = homogeneous_config();
  j["time"]["dt"] = 0.3;
  EXPECT_EQ(config_error(j), ErrorKind::InvalidConfig);
  j["time"] = {{"steps", 8}};
  EXPECT_DOUBLE_EQ(config_from_json(j).dt, 0.125);
}

TEST(Config, UnknownKindsAndMissingSections) {
  auto j = homogeneous_config();
  j["flow"]["kind"] = "vortex";
  EXPECT_EQ(config_error(j), ErrorKind::InvalidConfig);
  j = homogeneous_config();
  j.erase("grid");
  EXPECT_EQ(config_error(j), ErrorKind::MissingField);
  try {
    parse_config("[1, 2");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
  }
}

TEST(Config, HashIsStableAndIgnoresOutputDirectory) {
  auto a = homogeneous_config();
  auto b = homogeneous_config();
  b["output"]["directory"] = "elsewhere";
  EXPECT_EQ(config_from_json(a).hash, config_from_json(a).hash);
  EXPECT_EQ(config_from_json(a).hash, config_from_json(b).hash);
  b["model"]["tau0"] = 0.21;
  EXPECT_NE(config_from_json(a).hash, config_from_json(b).hash);
}

TEST(Config, SampleConfigsLoad) {
  for (const char* name : {"homogeneous_zero_flow.json", "shear_periodic.json", "taylor_green_closed.json",
                           "fragmentation_convergence.json", "unstable_timestep.json"}) {
    EXPECT_NO_THROW(load_config(std::string(RODFLOW_CONFIG_DIR) + "/" + name)) << name;
  }
}

TEST(Csv, PreambleCarriesVersionAndHash) {
  const auto pre = csv_preamble(0xabcULL);
  EXPECT_EQ(pre.rfind("# rodflow-diagnostics v1 config_hash=0000000000000abc\n", 0), 0u);
  DiagnosticsRecord r;
  r.step = 7;
  r.t = 0.1;
  const auto row = csv_row(r);
  EXPECT_EQ(row.rfind("7,0.10000000000000001,", 0), 0u);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(pre.begin(), pre.end(), ','));
}

TEST(Csv, MixedProvenanceRejected) {
  const auto dir = scratch_dir("csv_provenance");
  { CsvWriter(dir / "a.csv", 1); }
  { CsvWriter(dir / "b.csv", 1); }
  { CsvWriter(dir / "c.csv", 2); }
  EXPECT_NO_THROW(require_same_provenance(dir / "a.csv", dir / "b.csv"));
  try {
    require_same_provenance(dir / "a.csv", dir / "c.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ProvenanceMismatch);
  }
  std::ofstream(dir / "bad.csv") << "step,t\n";
  EXPECT_THROW(read_csv_hash(dir / "bad.csv"), Error);
}

TEST(Snapshot, RoundTrip) {
  const auto s = sample_snapshot();
  const auto dir = scratch_dir("snapshot_round_trip");
  write_snapshot(dir / "s.bin", s);
  const auto back = read_snapshot(dir / "s.bin");
  EXPECT_EQ(back.hash, s.hash);
  EXPECT_EQ(back.step, s.step);
  EXPECT_EQ(back.t, s.t);
  EXPECT_EQ(back.dims, s.dims);
  EXPECT_EQ(back.psi, s.psi);
  EXPECT_EQ(back.phi, s.phi);
  EXPECT_EQ(encode_snapshot(back), slurp(dir / "s.bin"));
}

TEST(Snapshot, OppositeByteOrderIsDecoded) {
  const auto s = sample_snapshot();
  std::string buf(kSnapshotMagic.data(), kSnapshotMagic.size());
  auto put = [&](auto v) {
    v = detail::byteswap_value(v);
    detail::put_raw(buf, v);
  };
  detail::put_raw(buf, kSnapshotVersion);
  put(kEndianMarker);
  put(s.hash);
  put(s.step);
  put(s.t);
  for (auto d : s.dims) put(d);
  put(s.r_max);
  put(s.alpha);
  for (double v : s.psi) put(v);
  for (double v : s.phi) put(v);
  const auto back = decode_snapshot(buf);
  EXPECT_EQ(back.hash, s.hash);
  EXPECT_EQ(back.psi, s.psi);
  EXPECT_EQ(back.phi, s.phi);
}

TEST(Snapshot, MalformedInputRejected) {
  auto bytes = encode_snapshot(sample_snapshot());
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_snapshot(bad_magic), Error);
  EXPECT_THROW(decode_snapshot(bytes + "z"), Error);
  EXPECT_THROW(decode_snapshot(bytes.substr(0, bytes.size() - 3)), Error);
  auto bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_THROW(decode_snapshot(bad_version), Error);
}

TEST(Snapshot, ComparisonRequiresSameProvenance) {
  auto a = sample_snapshot();
  auto b = a;
  b.psi[3] += 0.5;
  EXPECT_EQ(compare_snapshots(a, b), 0.5);
  b.hash ^= 1;
  try {
    compare_snapshots(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ProvenanceMismatch);
  }
}

TEST(Convergence, RefinedConfigHalvesStepsAndNestsGrid) {
  const auto base = homogeneous_config(65, 0.1);
  const auto two = refined_config(base, 2);
  EXPECT_EQ(two["grid"]["n_r"].get<int>(), 257);
  EXPECT_DOUBLE_EQ(two["time"]["dt"].get<double>(), 0.025);
  EXPECT_DOUBLE_EQ(two["solver"]["epsilon"].get<double>(), 0.0);
  auto by_steps = base;
  by_steps["time"] = {{"steps", 10}};
  by_steps["solver"]["epsilon"] = 1e-2;
  const auto one = refined_config(by_steps, 1);
  EXPECT_EQ(one["time"]["steps"].get<long>(), 20);
  EXPECT_DOUBLE_EQ(one["solver"]["epsilon"].get<double>(), 2.5e-3);
}

TEST(Convergence, NeedsThreeLevels) {
  try {
    convergence_study(config_from_json(homogeneous_config(17, 0.5)), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
  }
}

TEST(Convergence, EmptySystemHasNoDrift) {
  auto j = homogeneous_config(17, 0.25);
  j["initial"]["psi"] = {{"kind", "zero"}};
  const auto table = convergence_study(config_from_json(j), 3);
  ASSERT_EQ(table.levels.size(), 3u);
  for (const auto& l : table.levels) {
    EXPECT_EQ(l.mass_drift, 0.0);
    EXPECT_EQ(l.psi_difference, 0.0);
  }
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code(ErrorKind::TimestepTooLarge), 2);
  EXPECT_EQ(exit_code(ErrorKind::InvariantBreach), 2);
  EXPECT_EQ(exit_code(ErrorKind::BoundViolation), 2);
  EXPECT_EQ(exit_code(ErrorKind::SolverDiverged), 3);
  EXPECT_EQ(exit_code(ErrorKind::OdeToleranceExceeded), 3);
  EXPECT_EQ(exit_code(ErrorKind::InvalidConfig), 1);
  EXPECT_EQ(exit_code(ErrorKind::MissingField), 1);
  EXPECT_EQ(exit_code(ErrorKind::ProvenanceMismatch), 1);
}
