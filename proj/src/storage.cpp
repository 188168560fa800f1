#include "hcsim/storage.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "hcsim/config.hpp"
#include "json.hpp"

namespace hcsim {

namespace {

using crypto::FormatError;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t read_u64(std::span<const std::uint8_t> b) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::uint32_t read_u32(std::span<const std::uint8_t> b) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> EHRRecord::envelope_bytes() const {
  const std::string addr = address.canonical();
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'H', 'C', 'R', '1'});
  put_u32(out, static_cast<std::uint32_t>(addr.size()));
  out.insert(out.end(), addr.begin(), addr.end());
  put_u64(out, creation_tick);
  put_u64(out, body.size());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

EHRRecord EHRRecord::from_envelope(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 + 4 + 8 + 8 || std::memcmp(bytes.data(), "HCR1", 4) != 0) {
    throw FormatError("bad record envelope");
  }
  std::size_t pos = 4;
  const std::uint32_t addr_len = read_u32(bytes.subspan(pos, 4));
  pos += 4;
  if (bytes.size() - pos < addr_len + 16) throw FormatError("truncated record envelope");
  const std::string addr(bytes.begin() + pos, bytes.begin() + pos + addr_len);
  pos += addr_len;
  EHRRecord rec;
  rec.address = PatientAddress::parse(addr);
  rec.creation_tick = read_u64(bytes.subspan(pos, 8));
  pos += 8;
  const std::uint64_t body_len = read_u64(bytes.subspan(pos, 8));
  pos += 8;
  if (bytes.size() - pos != body_len) throw FormatError("record envelope length mismatch");
  rec.body.assign(bytes.begin() + pos, bytes.end());
  rec.encrypted = true;  // envelopes only ever hold sealed bodies
  return rec;
}

std::vector<std::uint8_t> RecordContent::to_bytes() const {
  std::vector<std::uint8_t> out(8 + payload.size());
  std::uint64_t bits = 0;
  std::memcpy(&bits, &severity_score, 8);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(bits >> (8 * i));
  std::copy(payload.begin(), payload.end(), out.begin() + 8);
  return out;
}

RecordContent RecordContent::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw FormatError("record content too short");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  RecordContent c;
  std::memcpy(&c.severity_score, &bits, 8);
  c.payload.assign(bytes.begin() + 8, bytes.end());
  return c;
}

StorageCluster::StorageCluster(std::vector<std::string> node_ids) : node_ids_(std::move(node_ids)) {
  if (node_ids_.empty()) throw std::invalid_argument("storage cluster needs at least one node");
}

std::string StorageCluster::placement_node(const ContentHash& hash) const {
  std::string best_node;
  crypto::Digest best_score{};
  for (const auto& node : node_ids_) {
    std::vector<std::uint8_t> material(node.begin(), node.end());
    material.push_back(0);
    material.insert(material.end(), hash.digest.begin(), hash.digest.end());
    const crypto::Digest score = crypto::sha256(material);
    if (best_node.empty() || score > best_score) {
      best_score = score;
      best_node = node;
    }
  }
  return best_node;
}

ContentHash StorageCluster::store(const EHRRecord& record) {
  if (!record.encrypted) throw PlaintextRefused();
  const std::vector<std::uint8_t> bytes = record.envelope_bytes();
  const ContentHash hash = ContentHash::of(bytes);
  const std::string hex = hash.to_hex();
  const std::string node = placement_node(hash);
  objects_[hex] = bytes;  // idempotent: identical bytes land on the same key
  object_nodes_[hex] = node;
  dht_[record.address.canonical()] = DhtEntry{hash, node, false};
  return hash;
}

std::optional<DhtEntry> StorageCluster::dht_lookup(const PatientAddress& address) const {
  const auto it = dht_.find(address.canonical());
  if (it == dht_.end() || it->second.tombstoned) return std::nullopt;
  return it->second;
}

FetchResult StorageCluster::fetch(const PatientAddress& address) const {
  FetchResult out;
  const auto entry = dht_lookup(address);
  if (!entry) return out;  // NotFound
  out.hash = entry->hash;
  out.node_id = entry->node_id;
  const auto obj = objects_.find(entry->hash.to_hex());
  if (obj == objects_.end()) return out;
  // Integrity gate: the fetched bytes must hash back to the index entry.
  if (ContentHash::of(obj->second) != entry->hash) {
    out.status = FetchStatus::IntegrityError;
    return out;
  }
  out.record = EHRRecord::from_envelope(obj->second);
  out.status = FetchStatus::Ok;
  return out;
}

std::size_t StorageCluster::object_count() const { return objects_.size(); }

std::vector<ContentHash> StorageCluster::objects_on(const std::string& node_id) const {
  std::vector<ContentHash> out;
  for (const auto& [hex, node] : object_nodes_) {
    if (node != node_id) continue;
    const auto raw = crypto::from_hex(hex);
    ContentHash h;
    std::copy(raw.begin(), raw.end(), h.digest.begin());
    out.push_back(h);
  }
  return out;
}

void StorageCluster::tombstone(const PatientAddress& address) {
  const auto it = dht_.find(address.canonical());
  if (it != dht_.end()) it->second.tombstoned = true;
}

void StorageCluster::gc(std::uint64_t) {
  for (auto it = dht_.begin(); it != dht_.end();) {
    if (!it->second.tombstoned) {
      ++it;
      continue;
    }
    const std::string hex = it->second.hash.to_hex();
    // Keep shared bytes if another live address still references them.
    bool referenced = false;
    for (const auto& [addr, entry] : dht_) {
      if (addr != it->first && !entry.tombstoned && entry.hash.to_hex() == hex) {
        referenced = true;
        break;
      }
    }
    if (!referenced) {
      objects_.erase(hex);
      object_nodes_.erase(hex);
    }
    it = dht_.erase(it);
  }
}

bool StorageCluster::tamper(const ContentHash& hash, std::size_t byte_index, std::uint8_t xor_mask) {
  const auto it = objects_.find(hash.to_hex());
  if (it == objects_.end() || byte_index >= it->second.size() || xor_mask == 0) return false;
  it->second[byte_index] ^= xor_mask;
  return true;
}

void StorageCluster::save(const std::filesystem::path& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "objects");
  for (const auto& [hex, bytes] : objects_) {
    std::ofstream out(dir / "objects" / hex, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  using json = nlohmann::ordered_json;
  json manifest;
  manifest["schema"] = "dht_manifest v1";
  json nodes = json::array();
  for (const auto& n : node_ids_) nodes.push_back(n);
  manifest["nodes"] = nodes;
  json entries = json::array();
  for (const auto& [addr, entry] : dht_) {
    json je;
    je["address"] = addr;
    je["hash"] = entry.hash.to_hex();
    je["node"] = entry.node_id;
    je["tombstoned"] = entry.tombstoned;
    entries.push_back(std::move(je));
  }
  manifest["entries"] = std::move(entries);
  std::ofstream out(dir / "dht_manifest.json");
  out << manifest.dump(2) << "\n";
}

StorageCluster StorageCluster::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  using json = nlohmann::json;
  std::ifstream in(dir / "dht_manifest.json");
  if (!in) throw ConfigError("missing DHT manifest under " + dir.string());
  json manifest = json::parse(in, nullptr, false);
  if (manifest.is_discarded()) throw ConfigError("DHT manifest is not valid JSON");
  std::vector<std::string> nodes;
  for (const auto& n : manifest.at("nodes")) nodes.push_back(n.get<std::string>());
  StorageCluster cluster(std::move(nodes));
  for (const auto& je : manifest.at("entries")) {
    DhtEntry entry;
    const auto raw = crypto::from_hex(je.at("hash").get<std::string>());
    if (raw.size() != entry.hash.digest.size()) throw ConfigError("bad hash in DHT manifest");
    std::copy(raw.begin(), raw.end(), entry.hash.digest.begin());
    entry.node_id = je.at("node").get<std::string>();
    entry.tombstoned = je.at("tombstoned").get<bool>();
    cluster.dht_[je.at("address").get<std::string>()] = entry;
  }
  if (fs::exists(dir / "objects")) {
    for (const auto& file : fs::directory_iterator(dir / "objects")) {
      std::ifstream obj(file.path(), std::ios::binary);
      std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(obj)),
                                      std::istreambuf_iterator<char>());
      const std::string hex = file.path().filename().string();
      cluster.objects_[hex] = std::move(bytes);
      ContentHash h;
      const auto raw = crypto::from_hex(hex);
      if (raw.size() == h.digest.size()) {
        std::copy(raw.begin(), raw.end(), h.digest.begin());
        cluster.object_nodes_[hex] = cluster.placement_node(h);
      }
    }
  }
  return cluster;
}

RetrievalLatencyModel RetrievalLatencyModel::load(const std::filesystem::path& anchors_csv) {
  std::ifstream in(anchors_csv);
  if (!in) throw ConfigError("cannot open retrieval anchors: " + anchors_csv.string());
  std::vector<std::pair<double, double>> centralized, distributed;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string mode, n_text, latency_text;
    if (!std::getline(ss, mode, ',') || !std::getline(ss, n_text, ',') ||
        !std::getline(ss, latency_text)) {
      throw ConfigError("malformed retrieval anchor line: " + line);
    }
    const double n = parse_double(n_text, "n_users");
    const double latency = parse_double(latency_text, "latency_s");
    if (mode == "centralized") {
      centralized.emplace_back(n, latency);
    } else if (mode == "distributed") {
      distributed.emplace_back(n, latency);
    } else {
      throw ConfigError("unknown retrieval mode: " + mode);
    }
  }
  return from_points(std::move(centralized), std::move(distributed));
}

RetrievalLatencyModel RetrievalLatencyModel::from_points(
    std::vector<std::pair<double, double>> centralized,
    std::vector<std::pair<double, double>> distributed) {
  auto prepare = [](std::vector<std::pair<double, double>>& points, const char* what) {
    if (points.size() < 2) throw ConfigError(std::string(what) + ": need at least two anchor points");
    std::sort(points.begin(), points.end());
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (points[i].first == points[i - 1].first) {
        throw ConfigError(std::string(what) + ": duplicate n_users anchor");
      }
    }
  };
  prepare(centralized, "centralized anchors");
  prepare(distributed, "distributed anchors");
  RetrievalLatencyModel model;
  model.centralized_ = std::move(centralized);
  model.distributed_ = std::move(distributed);
  return model;
}

const std::vector<std::pair<double, double>>& RetrievalLatencyModel::anchors(
    RetrievalMode mode) const {
  return mode == RetrievalMode::Centralized ? centralized_ : distributed_;
}

double RetrievalLatencyModel::latency_seconds(int n_concurrent_users, RetrievalMode mode) const {
  if (n_concurrent_users < 1) throw std::invalid_argument("n_concurrent_users must be >= 1");
  const auto& points = anchors(mode);
  const double n = n_concurrent_users;
  // Exact anchor hit returns the stored value untouched.
  for (const auto& [x, y] : points) {
    if (x == n) return y;
  }
  // Pick the segment containing n, or the end segment for extrapolation.
  std::size_t hi = 1;
  while (hi + 1 < points.size() && points[hi].first < n) ++hi;
  const auto& [x0, y0] = points[hi - 1];
  const auto& [x1, y1] = points[hi];
  return y0 + (y1 - y0) * (n - x0) / (x1 - x0);
}

}  // namespace hcsim
