#include "hcsim/ledger.hpp"

#include <algorithm>
#include <cstring>

#include "json.hpp"

namespace hcsim {

namespace {

using crypto::FormatError;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_bytes(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> bytes) {
  put_u32(out, static_cast<std::uint32_t>(bytes.size()));
  out.insert(out.end(), bytes.begin(), bytes.end());
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  put_bytes(out, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::vector<std::uint8_t> bytes() {
    auto b = take(u32());
    return {b.begin(), b.end()};
  }
  std::string string() {
    auto b = take(u32());
    return {b.begin(), b.end()};
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated transaction encoding");
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

const char* const kKnownMethods[] = {"AddUser", "DeleteUser", "PolicyList", "RetrieveEHRs",
                                     "Penalty"};

}  // namespace

std::string PatientAddress::canonical() const {
  if (area_id.empty() || patient_id.empty()) {
    throw std::invalid_argument("patient address parts must be non-empty");
  }
  return area_id + ":" + patient_id;
}

PatientAddress PatientAddress::parse(const std::string& canonical) {
  const auto sep = canonical.find(':');
  if (sep == std::string::npos || sep == 0 || sep + 1 == canonical.size()) {
    throw std::invalid_argument("patient address must be 'AreaID:PatientID'");
  }
  return PatientAddress{canonical.substr(0, sep), canonical.substr(sep + 1)};
}

std::vector<std::uint8_t> Transaction::signing_bytes() const {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'H', 'C', 'T', 'X'});
  out.push_back(1);  // version
  put_bytes(out, sender_public_key);
  put_string(out, method);
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  for (const auto& [key, value] : payload) {
    put_string(out, key);
    put_string(out, value);
  }
  put_u64(out, timestamp);
  return out;
}

std::vector<std::uint8_t> Transaction::canonical_bytes() const {
  std::vector<std::uint8_t> out = signing_bytes();
  put_bytes(out, signature);
  return out;
}

crypto::Digest Transaction::compute_id() const { return crypto::sha256(canonical_bytes()); }

Transaction Transaction::make_signed(const crypto::KeyPair& sender, const std::string& method,
                                     std::vector<std::pair<std::string, std::string>> payload,
                                     std::uint64_t tick) {
  Transaction tx;
  tx.sender_public_key = sender.public_key;
  tx.method = method;
  std::sort(payload.begin(), payload.end());
  tx.payload = std::move(payload);
  tx.timestamp = tick;
  tx.signature = crypto::sign(tx.signing_bytes(), sender);
  tx.tx_id = tx.compute_id();
  return tx;
}

Transaction Transaction::decode(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(4);
  if (std::memcmp(magic.data(), "HCTX", 4) != 0) throw FormatError("bad transaction magic");
  if (r.u8() != 1) throw FormatError("unsupported transaction version");
  Transaction tx;
  tx.sender_public_key = r.bytes();
  tx.method = r.string();
  const std::uint32_t n_fields = r.u32();
  for (std::uint32_t i = 0; i < n_fields; ++i) {
    std::string key = r.string();
    std::string value = r.string();
    if (!tx.payload.empty() && !(tx.payload.back().first < key)) {
      throw FormatError("payload fields not in canonical (sorted, unique) order");
    }
    tx.payload.emplace_back(std::move(key), std::move(value));
  }
  tx.timestamp = r.u64();
  tx.signature = r.bytes();
  if (!r.done()) throw FormatError("trailing bytes after transaction");
  tx.tx_id = tx.compute_id();
  return tx;
}

std::optional<std::string> Transaction::field(const std::string& key) const {
  for (const auto& [k, v] : payload) {
    if (k == key) return v;
  }
  return std::nullopt;
}

crypto::Digest Block::compute_hash(const Block& b) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'H', 'C', 'B', 'K'});
  put_u64(out, b.height);
  out.insert(out.end(), b.previous_hash.begin(), b.previous_hash.end());
  put_u32(out, static_cast<std::uint32_t>(b.transactions.size()));
  for (const auto& tx : b.transactions) {
    const crypto::Digest id = tx.compute_id();  // always recomputed from contents
    out.insert(out.end(), id.begin(), id.end());
  }
  put_string(out, b.sealer);
  return crypto::sha256(out);
}

const std::vector<std::uint8_t>& get_sender_public_key(const Transaction& tx) {
  if (tx.sender_public_key.size() != crypto::kPublicKeyBytes) {
    throw FormatError("malformed sender public key");
  }
  if (!crypto::verify(tx.signing_bytes(), tx.signature, tx.sender_public_key)) {
    throw crypto::AuthenticationError("transaction signature does not verify");
  }
  return tx.sender_public_key;
}

DecodedMethod decode_method(const Transaction& tx) {
  const bool known = std::any_of(std::begin(kKnownMethods), std::end(kKnownMethods),
                                 [&](const char* m) { return tx.method == m; });
  if (!known) throw UnknownMethodError("unknown contract method: '" + tx.method + "'");
  DecodedMethod d;
  d.method = tx.method;
  for (const auto& [k, v] : tx.payload) d.fields[k] = v;
  auto require = [&](const char* key) {
    if (!d.fields.count(key)) {
      throw FormatError(tx.method + " payload is missing field '" + key + "'");
    }
  };
  if (tx.method == "AddUser") {
    require("pk");
    require("role");
  } else if (tx.method == "DeleteUser" || tx.method == "PolicyList") {
    require("pk");
  } else if (tx.method == "RetrieveEHRs") {
    require("area_id");
    require("patient_id");
    require("device_id");
  } else if (tx.method == "Penalty") {
    require("pk");
    require("action");
  }
  return d;
}

std::optional<PatientAddress> DecodedMethod::patient_address() const {
  const auto area = fields.find("area_id");
  const auto patient = fields.find("patient_id");
  if (area == fields.end() || patient == fields.end()) return std::nullopt;
  return PatientAddress{area->second, patient->second};
}

ChainVerdict verify_blocks(std::span<const Block> blocks) {
  // Pass 1: every hash link. Any byte of any field feeds some digest, so
  // this alone pins the first corrupted height.
  crypto::Digest expected_prev{};  // genesis links to all-zero
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    const auto corrupt = [&] { return ChainVerdict{false, static_cast<std::uint64_t>(i)}; };
    if (b.height != i) return corrupt();
    if (b.previous_hash != expected_prev) return corrupt();
    for (const auto& tx : b.transactions) {
      if (tx.tx_id != tx.compute_id()) return corrupt();
    }
    if (Block::compute_hash(b) != b.hash) return corrupt();
    expected_prev = b.hash;
  }
  // Pass 2: with the links intact, re-check every signature (guards
  // imported chains whose hashes were rebuilt around a forged payload).
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (const auto& tx : blocks[i].transactions) {
      if (tx.sender_public_key.size() != crypto::kPublicKeyBytes ||
          !crypto::verify(tx.signing_bytes(), tx.signature, tx.sender_public_key)) {
        return ChainVerdict{false, static_cast<std::uint64_t>(i)};
      }
    }
  }
  return ChainVerdict{};
}

Ledger::Ledger(std::vector<std::string> sealers) : sealers_(std::move(sealers)) {
  if (sealers_.empty()) throw std::invalid_argument("ledger needs at least one sealer");
  Block genesis;
  genesis.height = 0;
  genesis.sealer = "genesis";
  genesis.hash = Block::compute_hash(genesis);
  blocks_.push_back(std::move(genesis));
  tick_ = 1;
}

SubmitStatus Ledger::submit(Transaction tx) {
  if (tx.sender_public_key.size() != crypto::kPublicKeyBytes ||
      !crypto::verify(tx.signing_bytes(), tx.signature, tx.sender_public_key)) {
    return SubmitStatus::BadSignature;
  }
  const std::string id = crypto::hex(tx.compute_id());
  if (!seen_tx_ids_.insert(id).second) return SubmitStatus::DuplicateTxId;
  mempool_.push_back(std::move(tx));
  return SubmitStatus::Accepted;
}

const Block& Ledger::seal_block() {
  Block b;
  b.height = blocks_.size();
  b.previous_hash = blocks_.back().hash;
  b.transactions = std::move(mempool_);
  mempool_.clear();
  // Round-robin over the authority set, starting with the first sealer.
  b.sealer = sealers_[(b.height - 1) % sealers_.size()];
  b.hash = Block::compute_hash(b);
  blocks_.push_back(std::move(b));
  for (auto& p : participants_) p.view.push_back(blocks_.back());
  ++tick_;
  return blocks_.back();
}

std::size_t Ledger::register_participant(const std::string& name) {
  Participant p;
  p.name = name;
  p.view.assign(blocks_.begin(), blocks_.end());
  participants_.push_back(std::move(p));
  return participants_.size() - 1;
}

void Ledger::export_ndjson(std::ostream& out) const {
  using json = nlohmann::ordered_json;
  for (const Block& b : blocks_) {
    json jb;
    jb["height"] = b.height;
    jb["previous_hash"] = crypto::hex(b.previous_hash);
    jb["sealer"] = b.sealer;
    jb["hash"] = crypto::hex(b.hash);
    json txs = json::array();
    for (const Transaction& tx : b.transactions) {
      json jt;
      jt["tx_id"] = crypto::hex(tx.tx_id);
      jt["sender_public_key"] = crypto::hex(tx.sender_public_key);
      jt["method"] = tx.method;
      json payload = json::object();
      for (const auto& [k, v] : tx.payload) payload[k] = v;
      jt["payload"] = payload;
      jt["timestamp"] = tx.timestamp;
      jt["signature"] = crypto::hex(tx.signature);
      txs.push_back(std::move(jt));
    }
    jb["transactions"] = std::move(txs);
    out << jb.dump() << "\n";
  }
}

Ledger Ledger::import_ndjson(std::istream& in, std::vector<std::string> sealers) {
  using json = nlohmann::ordered_json;
  Ledger ledger(std::move(sealers));
  ledger.blocks_.clear();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json jb = json::parse(line, nullptr, false);
    if (jb.is_discarded()) throw FormatError("chain file is not valid NDJSON");
    Block b;
    b.height = jb.at("height").get<std::uint64_t>();
    auto prev = crypto::from_hex(jb.at("previous_hash").get<std::string>());
    auto hash = crypto::from_hex(jb.at("hash").get<std::string>());
    if (prev.size() != b.previous_hash.size() || hash.size() != b.hash.size()) {
      throw FormatError("bad digest length in chain file");
    }
    std::copy(prev.begin(), prev.end(), b.previous_hash.begin());
    std::copy(hash.begin(), hash.end(), b.hash.begin());
    b.sealer = jb.at("sealer").get<std::string>();
    for (const auto& jt : jb.at("transactions")) {
      Transaction tx;
      tx.sender_public_key = crypto::from_hex(jt.at("sender_public_key").get<std::string>());
      tx.method = jt.at("method").get<std::string>();
      for (const auto& [k, v] : jt.at("payload").items()) {
        tx.payload.emplace_back(k, v.get<std::string>());
      }
      std::sort(tx.payload.begin(), tx.payload.end());
      tx.timestamp = jt.at("timestamp").get<std::uint64_t>();
      tx.signature = crypto::from_hex(jt.at("signature").get<std::string>());
      const auto id = crypto::from_hex(jt.at("tx_id").get<std::string>());
      if (id.size() != tx.tx_id.size()) throw FormatError("bad tx id length in chain file");
      std::copy(id.begin(), id.end(), tx.tx_id.begin());
      ledger.seen_tx_ids_.insert(crypto::hex(tx.tx_id));
      b.transactions.push_back(std::move(tx));
    }
    ledger.blocks_.push_back(std::move(b));
  }
  if (ledger.blocks_.empty()) throw FormatError("chain file contains no blocks");
  ledger.tick_ = ledger.blocks_.size();
  return ledger;
}

}  // namespace hcsim
