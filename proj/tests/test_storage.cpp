#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>

#include "hcsim/storage.hpp"

using namespace hcsim;

namespace {

const std::vector<std::string> kNodes{"node-a", "node-b", "node-c", "node-d"};

EHRRecord sealed_record(std::mt19937_64& rng, const PatientAddress& addr, std::size_t bytes = 64) {
  static const crypto::KeyMaterial key = crypto::KeyMaterial::derive(3, "storage-test");
  static crypto::DeterministicNonceSource nonces(33);
  RecordContent content;
  content.severity_score = 2.5;
  content.payload.resize(bytes);
  for (auto& b : content.payload) b = static_cast<std::uint8_t>(rng());
  EHRRecord rec;
  rec.address = addr;
  rec.body = crypto::encrypt(content.to_bytes(), key, nonces).serialize();
  rec.encrypted = true;
  rec.creation_tick = 1;
  return rec;
}

RetrievalLatencyModel latency_model() {
  return RetrievalLatencyModel::load(std::filesystem::path(HCSIM_DATA_DIR) /
                                     "retrieval_anchors_v1.csv");
}

}  // namespace

TEST_CASE("store then fetch returns identical bytes") {
  std::mt19937_64 rng(1);
  StorageCluster cluster(kNodes);
  const PatientAddress addr{"a", "p"};
  const EHRRecord rec = sealed_record(rng, addr);
  const ContentHash hash = cluster.store(rec);
  const FetchResult out = cluster.fetch(addr);
  REQUIRE(out.status == FetchStatus::Ok);
  CHECK(out.record.body == rec.body);
  CHECK(out.record.address == addr);
  CHECK(out.hash == hash);
  CHECK(out.hash == ContentHash::of(rec.envelope_bytes()));
}

TEST_CASE("storing identical bytes twice is idempotent") {
  std::mt19937_64 rng(2);
  StorageCluster cluster(kNodes);
  const EHRRecord rec = sealed_record(rng, {"a", "p"});
  const ContentHash h1 = cluster.store(rec);
  const ContentHash h2 = cluster.store(rec);
  CHECK(h1 == h2);
  CHECK(cluster.object_count() == 1);
}

TEST_CASE("plaintext records are refused") {
  StorageCluster cluster(kNodes);
  EHRRecord rec;
  rec.address = {"a", "p"};
  rec.body = {1, 2, 3};
  rec.encrypted = false;
  CHECK_THROWS_AS(cluster.store(rec), PlaintextRefused);
}

TEST_CASE("a new store for the same address supersedes the DHT entry") {
  std::mt19937_64 rng(3);
  StorageCluster cluster(kNodes);
  const PatientAddress addr{"a", "p"};
  cluster.store(sealed_record(rng, addr));
  const EHRRecord second = sealed_record(rng, addr);
  const ContentHash h2 = cluster.store(second);
  const auto entry = cluster.dht_lookup(addr);
  REQUIRE(entry.has_value());
  CHECK(entry->hash == h2);
  const FetchResult out = cluster.fetch(addr);
  CHECK(out.record.body == second.body);
}

TEST_CASE("12 records across 4 nodes follow the documented rendezvous rule") {
  std::mt19937_64 rng(4);
  StorageCluster cluster(kNodes);
  int placed = 0;
  for (int i = 0; i < 12; ++i) {
    const PatientAddress addr{"area-" + std::to_string(i % 3), "patient-" + std::to_string(i)};
    const EHRRecord rec = sealed_record(rng, addr);
    const ContentHash hash = cluster.store(rec);

    // Independent oracle: node maximizing sha256(node_id | 0x00 | hash).
    std::string expected;
    std::array<std::uint8_t, 32> best{};
    for (const auto& node : kNodes) {
      std::vector<std::uint8_t> material(node.begin(), node.end());
      material.push_back(0);
      material.insert(material.end(), hash.digest.begin(), hash.digest.end());
      const auto score = crypto::sha256(material);
      if (expected.empty() || score > best) {
        best = score;
        expected = node;
      }
    }
    const auto entry = cluster.dht_lookup(addr);
    REQUIRE(entry.has_value());
    CHECK(entry->node_id == expected);
    CHECK(cluster.fetch(addr).status == FetchStatus::Ok);
    ++placed;
  }
  CHECK(placed == 12);
  std::size_t across_nodes = 0;
  for (const auto& node : kNodes) across_nodes += cluster.objects_on(node).size();
  CHECK(across_nodes == cluster.object_count());
}

TEST_CASE("out-of-band corruption surfaces as integrity_error") {
  std::mt19937_64 rng(5);
  StorageCluster cluster(kNodes);
  const PatientAddress addr{"a", "p"};
  const ContentHash hash = cluster.store(sealed_record(rng, addr));
  REQUIRE(cluster.tamper(hash, 10, 0x04));
  const FetchResult out = cluster.fetch(addr);
  CHECK(out.status == FetchStatus::IntegrityError);
}

TEST_CASE("every single-bit corruption of every stored object is detected") {
  std::mt19937_64 rng(6);
  StorageCluster cluster(kNodes);
  std::vector<PatientAddress> addrs;
  std::vector<ContentHash> hashes;
  for (int i = 0; i < 8; ++i) {
    const PatientAddress addr{"a", "p" + std::to_string(i)};
    addrs.push_back(addr);
    hashes.push_back(cluster.store(sealed_record(rng, addr, 32)));
  }
  for (std::size_t i = 0; i < addrs.size(); ++i) {
    const std::size_t size = cluster.fetch(addrs[i]).record.envelope_bytes().size();
    for (std::size_t byte = 0; byte < size; ++byte) {
      for (int bit = 0; bit < 8; ++bit) {
        const std::uint8_t mask = static_cast<std::uint8_t>(1u << bit);
        REQUIRE(cluster.tamper(hashes[i], byte, mask));
        CHECK(cluster.fetch(addrs[i]).status == FetchStatus::IntegrityError);
        REQUIRE(cluster.tamper(hashes[i], byte, mask));  // restore
        CHECK(cluster.fetch(addrs[i]).status == FetchStatus::Ok);
      }
    }
  }
}

TEST_CASE("unknown address reports not_found") {
  StorageCluster cluster(kNodes);
  CHECK(cluster.fetch({"a", "nobody"}).status == FetchStatus::NotFound);
}

TEST_CASE("tombstone hides immediately, gc drops bytes at the next tick") {
  std::mt19937_64 rng(7);
  StorageCluster cluster(kNodes);
  const PatientAddress addr{"a", "p"};
  cluster.store(sealed_record(rng, addr));
  cluster.tombstone(addr);
  CHECK(cluster.fetch(addr).status == FetchStatus::NotFound);
  CHECK(cluster.object_count() == 1);  // bytes linger until the tick
  cluster.gc(2);
  CHECK(cluster.object_count() == 0);
}

TEST_CASE("gc keeps bytes still referenced by another live address") {
  std::mt19937_64 rng(8);
  StorageCluster cluster(kNodes);
  const EHRRecord rec = sealed_record(rng, {"a", "p1"});
  cluster.store(rec);
  EHRRecord same_bytes = rec;  // same envelope -> same content hash
  cluster.store(same_bytes);
  EHRRecord other = rec;
  other.address = {"a", "p2"};
  cluster.store(other);
  cluster.tombstone({"a", "p1"});
  cluster.gc(3);
  CHECK(cluster.fetch({"a", "p2"}).status == FetchStatus::Ok);
}

TEST_CASE("persistence round trip through hash-named files and manifest") {
  namespace fs = std::filesystem;
  std::mt19937_64 rng(9);
  const fs::path dir = fs::temp_directory_path() / "hcsim_storage_test";
  fs::remove_all(dir);
  {
    StorageCluster cluster(kNodes);
    for (int i = 0; i < 5; ++i) {
      cluster.store(sealed_record(rng, {"a", "p" + std::to_string(i)}));
    }
    cluster.save(dir);
  }
  StorageCluster loaded = StorageCluster::load(dir);
  CHECK(loaded.object_count() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(loaded.fetch({"a", "p" + std::to_string(i)}).status == FetchStatus::Ok);
  }
  // Corrupt one object file on disk; the reload must flag it.
  const auto entry = loaded.dht_lookup({"a", "p0"});
  REQUIRE(entry.has_value());
  const fs::path object_file = dir / "objects" / entry->hash.to_hex();
  {
    std::fstream f(object_file, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(6);
    char c;
    f.seekg(6);
    f.get(c);
    f.seekp(6);
    f.put(static_cast<char>(c ^ 0x20));
  }
  StorageCluster tampered = StorageCluster::load(dir);
  CHECK(tampered.fetch({"a", "p0"}).status == FetchStatus::IntegrityError);
  fs::remove_all(dir);
}

TEST_CASE("record envelope and content codecs") {
  std::mt19937_64 rng(10);
  const EHRRecord rec = sealed_record(rng, {"area-9", "patient-9"});
  const EHRRecord back = EHRRecord::from_envelope(rec.envelope_bytes());
  CHECK(back.address == rec.address);
  CHECK(back.creation_tick == rec.creation_tick);
  CHECK(back.body == rec.body);
  CHECK(back.encrypted);
  std::vector<std::uint8_t> junk{'H', 'C', 'R', '2', 0};
  CHECK_THROWS_AS(EHRRecord::from_envelope(junk), crypto::FormatError);

  RecordContent content{3.25, {9, 8, 7}};
  const RecordContent round = RecordContent::from_bytes(content.to_bytes());
  CHECK(round.severity_score == 3.25);
  CHECK(round.payload == content.payload);
  CHECK_THROWS_AS(RecordContent::from_bytes(std::vector<std::uint8_t>{1, 2}), crypto::FormatError);
}

TEST_CASE("latency model reproduces every published cell") {
  const RetrievalLatencyModel model = latency_model();
  const struct {
    int n;
    double centralized;
    double distributed;
  } cells[] = {{2, 1.6, 0.6}, {4, 2.4, 1.6},  {6, 3.9, 2.6},
               {8, 4.8, 3.5}, {10, 5.5, 4.4}, {12, 7.8, 5.3}};
  for (const auto& cell : cells) {
    CHECK(model.latency_seconds(cell.n, RetrievalMode::Centralized) == cell.centralized);
    CHECK(model.latency_seconds(cell.n, RetrievalMode::Distributed) == cell.distributed);
  }
}

TEST_CASE("latency is monotone and distributed never loses, n in [1,16]") {
  const RetrievalLatencyModel model = latency_model();
  double prev_c = 0, prev_d = 0;
  for (int n = 1; n <= 16; ++n) {
    const double c = model.latency_seconds(n, RetrievalMode::Centralized);
    const double d = model.latency_seconds(n, RetrievalMode::Distributed);
    CHECK(c > 0);
    CHECK(d > 0);
    CHECK(d < c);
    CHECK(c >= prev_c);
    CHECK(d >= prev_d);
    prev_c = c;
    prev_d = d;
  }
}

TEST_CASE("between-anchor latencies interpolate linearly") {
  const RetrievalLatencyModel model = latency_model();
  // Midpoint of the (2,1.6)-(4,2.4) segment.
  CHECK(model.latency_seconds(3, RetrievalMode::Centralized) == doctest::Approx(2.0));
  // Extrapolation beyond n=12 continues the last segment slope.
  CHECK(model.latency_seconds(14, RetrievalMode::Centralized) ==
        doctest::Approx(7.8 + 2 * (7.8 - 5.5) / 2));
  CHECK(model.latency_seconds(13, RetrievalMode::Distributed) ==
        doctest::Approx(5.3 + (5.3 - 4.4) / 2));
  CHECK_THROWS_AS(model.latency_seconds(0, RetrievalMode::Centralized), std::invalid_argument);
}

TEST_CASE("cas identity on a randomized corpus") {
  std::mt19937_64 rng(11);
  StorageCluster cluster(kNodes);
  for (int i = 0; i < 40; ++i) {
    const PatientAddress addr{"z", "p" + std::to_string(i)};
    const EHRRecord rec = sealed_record(rng, addr, 16 + rng() % 200);
    cluster.store(rec);
    const FetchResult out = cluster.fetch(addr);
    REQUIRE(out.status == FetchStatus::Ok);
    CHECK(out.record.envelope_bytes() == rec.envelope_bytes());
  }
}
