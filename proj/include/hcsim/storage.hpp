#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hcsim/crypto.hpp"
#include "hcsim/ledger.hpp"

namespace hcsim {

struct ContentHash {
  crypto::Digest digest{};

  std::string to_hex() const { return crypto::hex(digest); }
  static ContentHash of(std::span<const std::uint8_t> bytes) { return {crypto::sha256(bytes)}; }
  auto operator<=>(const ContentHash&) const = default;
};

// Analysed health result headed for storage. The body must already be an
// encrypted container; storage never sees plaintext.
//
// Storage envelope (little-endian): "HCR1" | u32 addr len | addr canonical
// | u64 creation_tick | u64 body len | body.
struct EHRRecord {
  PatientAddress address;
  std::vector<std::uint8_t> body;  // ciphertext container bytes
  bool encrypted = false;
  std::uint64_t creation_tick = 0;

  std::vector<std::uint8_t> envelope_bytes() const;
  static EHRRecord from_envelope(std::span<const std::uint8_t> bytes);
};

// Plaintext record content: severity score plus opaque analysed bytes.
// Serialized as score (f64 little-endian) followed by the raw payload, then
// sealed with the AEAD before storage.
struct RecordContent {
  double severity_score = 0;
  std::vector<std::uint8_t> payload;

  std::vector<std::uint8_t> to_bytes() const;
  static RecordContent from_bytes(std::span<const std::uint8_t> bytes);
};

struct DhtEntry {
  ContentHash hash;
  std::string node_id;
  bool tombstoned = false;
};

enum class FetchStatus { Ok, NotFound, IntegrityError };

struct FetchResult {
  FetchStatus status = FetchStatus::NotFound;
  EHRRecord record;    // valid when status == Ok
  ContentHash hash{};  // hash under which the bytes were stored
  std::string node_id;
};

struct PlaintextRefused : std::runtime_error {
  PlaintextRefused() : std::runtime_error("storage only accepts encrypted records") {}
};

// Cluster of virtual storage nodes indexed by a patient-address DHT.
// Placement is rendezvous hashing: the node maximizing
// sha256(node_id | 0x00 | content hash) wins.
class StorageCluster {
 public:
  explicit StorageCluster(std::vector<std::string> node_ids);

  ContentHash store(const EHRRecord& record);
  FetchResult fetch(const PatientAddress& address) const;
  std::optional<DhtEntry> dht_lookup(const PatientAddress& address) const;

  std::string placement_node(const ContentHash& hash) const;
  const std::vector<std::string>& nodes() const { return node_ids_; }
  std::size_t object_count() const;
  std::vector<ContentHash> objects_on(const std::string& node_id) const;

  // delete_user support: marks the address dead immediately; bytes are
  // dropped at the next gc tick.
  void tombstone(const PatientAddress& address);
  void gc(std::uint64_t tick);

  // Out-of-band corruption hook for the attack scenarios: flips bits in the
  // stored bytes without touching the index, as an external attacker would.
  bool tamper(const ContentHash& hash, std::size_t byte_index, std::uint8_t xor_mask);

  // Directory layout: <dir>/objects/<hex hash> plus <dir>/dht_manifest.json.
  void save(const std::filesystem::path& dir) const;
  static StorageCluster load(const std::filesystem::path& dir);

 private:
  std::vector<std::string> node_ids_;
  std::map<std::string, DhtEntry> dht_;                         // canonical address -> entry
  std::map<std::string, std::vector<std::uint8_t>> objects_;    // hex hash -> bytes
  std::map<std::string, std::string> object_nodes_;             // hex hash -> node id
};

enum class RetrievalMode { Centralized, Distributed };

// Piecewise-linear latency model through the published (n_users, seconds)
// anchor points; end segments extrapolate.
class RetrievalLatencyModel {
 public:
  static RetrievalLatencyModel load(const std::filesystem::path& anchors_csv);
  static RetrievalLatencyModel from_points(std::vector<std::pair<double, double>> centralized,
                                           std::vector<std::pair<double, double>> distributed);

  double latency_seconds(int n_concurrent_users, RetrievalMode mode) const;
  const std::vector<std::pair<double, double>>& anchors(RetrievalMode mode) const;

 private:
  std::vector<std::pair<double, double>> centralized_;
  std::vector<std::pair<double, double>> distributed_;
};

}  // namespace hcsim
