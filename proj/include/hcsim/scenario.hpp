#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hcsim/contract.hpp"
#include "hcsim/cost_model.hpp"
#include "hcsim/optimizer.hpp"
#include "hcsim/protocol.hpp"
#include "hcsim/storage.hpp"

namespace hcsim {

enum class Scheme { Local, Cloud, Edge };
std::string to_string(Scheme s);
std::optional<Scheme> scheme_from_string(const std::string& text);

// Device/edge constants used when backing profile coefficients out of the
// anchor curves.
struct HardwareModel {
  double link_rate_bps = kDefaultLinkCapBps;
  double freq_local_hz = 2.8e9;
  double freq_edge_hz = 2.5e9;
  // Share of non-transmission offload time attributed to encryption.
  double enc_time_fraction = 0.25;
  double power_trans_mah_per_s = 1.0;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";

  // offload
  std::vector<double> sizes_kb;
  std::vector<Scheme> schemes;
  std::filesystem::path offload_anchors;
  HardwareModel hardware;

  // sharing
  std::filesystem::path retrieval_anchors;
  std::filesystem::path gas_schedule;
  std::vector<std::string> storage_nodes;
  std::vector<std::string> miners;
  std::vector<int> users_n;
  int patients = 3;
  int doctors = 2;
  int key_bits = 128;

  PsoConfig pso;

  // Relative paths in the file resolve against its parent directory; every
  // referenced path must exist.
  static ScenarioConfig load(const std::filesystem::path& path);
};

// One piecewise-linear curve per (scheme, metric), anchored exactly on the
// published points; end segments extrapolate.
class PiecewiseCurve {
 public:
  explicit PiecewiseCurve(std::vector<std::pair<double, double>> points);
  double at(double x) const;
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<double, double>> points_;
};

enum class Metric { Time, Energy, Memory };

// Calibrated offload cost model: interpolates the anchor measurements and
// synthesizes TaskProfiles whose cost-model outputs land back on the curves.
class OffloadCalibration {
 public:
  static OffloadCalibration load(const std::filesystem::path& anchors_csv, HardwareModel hw);

  const PiecewiseCurve& curve(Scheme scheme, Metric metric) const;
  CostTriple curve_values(Scheme scheme, double size_kb) const;

  // Profile with local-side fields from the local curves and offload-side
  // fields from the given variant (Edge or Cloud) curves.
  TaskProfile profile(Scheme offload_variant, double size_kb) const;

  // Scheme cost at a size, computed through the cost model only.
  CostTriple scheme_costs(Scheme scheme, double size_kb) const;

  std::vector<double> anchor_sizes_kb() const;
  void print_audit(std::ostream& out) const;
  const HardwareModel& hardware() const { return hw_; }

 private:
  HardwareModel hw_;
  std::vector<PiecewiseCurve> curves_;  // indexed by scheme*3 + metric
};

// The configured sharing network: ledger, contract, storage and the scripted
// population (manager, patients with one stored record each, doctors with
// the first one bound to patient 0). Everything derives from the seed.
// Immovable because the system wires references between members.
class SharingWorld {
 public:
  static std::unique_ptr<SharingWorld> create(const ScenarioConfig& cfg, std::ostream* runlog);

  SharingWorld(const SharingWorld&) = delete;
  SharingWorld& operator=(const SharingWorld&) = delete;

  Ledger ledger;
  GasSchedule schedule;
  crypto::KeyPair admin;
  crypto::KeyPair manager;
  SmartContract contract;
  StorageCluster storage;
  crypto::KeyMaterial record_key;
  crypto::DeterministicNonceSource nonces;
  SharingSystem system;
  std::vector<crypto::KeyPair> patients;
  std::vector<PatientAddress> patient_addresses;
  std::vector<crypto::KeyPair> doctors;

 private:
  explicit SharingWorld(const ScenarioConfig& cfg);
};

struct OffloadGridCell {
  Scheme scheme = Scheme::Local;
  double size_kb = 0;
  CostTriple costs;
};

struct LatencyRow {
  int n_users = 0;
  double centralized_s = 0;
  double distributed_s = 0;
  double savings = 0;  // (centralized - distributed) / centralized
};

struct OutcomeRecord {
  std::string label;
  std::string requester;
  AccessOutcome outcome;
};

struct MetricsReport {
  std::vector<OffloadGridCell> offload_grid;
  std::vector<LatencyRow> latency_rows;
  std::vector<GasReceipt> gas_rows;  // published row order, Total last
  std::vector<OutcomeRecord> outcomes;
  std::uint64_t sealed_blocks = 0;
  std::uint64_t chain_transactions = 0;
};

// 3 schemes x sizes grid of (time, energy, memory), every value produced by
// cost-model calls on calibrated profiles.
MetricsReport run_offload_experiment(const ScenarioConfig& cfg, const OffloadCalibration& calibration,
                                     std::ostream& runlog);

// Registers users, stores encrypted records, replays authorized and
// unauthorized request scripts, runs the canonical five-function gas session
// and evaluates the retrieval-latency table. Writes chain/storage artifacts
// under out_dir unless persist_artifacts is off (the gas table alone does
// not need them).
MetricsReport run_sharing_experiment(const ScenarioConfig& cfg,
                                     const std::filesystem::path& out_dir, std::ostream& runlog,
                                     bool persist_artifacts = true);

enum class ReportFormat { Csv, Plotfile };

// Deterministic, byte-stable report files under out_dir.
std::vector<std::filesystem::path> emit_report(const MetricsReport& report,
                                               const std::filesystem::path& out_dir,
                                               ReportFormat format);

// Both experiments plus both report formats; the tree is a pure function of
// the config (used by the determinism gate).
void run_full_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

// Offloading instance files ([bounds]/[weights]/[task] sections).
struct InstanceFile {
  std::vector<TaskProfile> tasks;
  CostWeights weights;
  ConstraintBounds bounds;

  static InstanceFile load(const std::filesystem::path& path);
};

// %.10g rendering used in CSV cells; run logs carry %.17g.
std::string format_double(double v);
std::string format_double_full(double v);

}  // namespace hcsim
