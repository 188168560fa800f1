#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hcsim/crypto.hpp"

namespace hcsim {

struct PatientAddress {
  std::string area_id;
  std::string patient_id;

  // Canonical rendering "AreaID:PatientID"; both parts must be non-empty.
  std::string canonical() const;
  static PatientAddress parse(const std::string& canonical);

  auto operator<=>(const PatientAddress&) const = default;
};

// Contract-invocation record. Payload fields are string key/value pairs held
// in sorted key order so the canonical encoding is unique; payloads carry
// patient addresses and metadata, never record plaintext.
//
// Canonical encoding (little-endian, golden-tested):
//   signing bytes  = "HCTX" | u8 version(1) | u32 pk len | pk
//                  | u32 method len | method | u32 field count
//                  | per field: u32 key len | key | u32 value len | value
//                  | u64 timestamp
//   canonical     = signing bytes | u32 signature len | signature
//   tx_id         = sha256(canonical)
struct Transaction {
  crypto::Digest tx_id{};
  std::vector<std::uint8_t> sender_public_key;
  std::string method;
  std::vector<std::pair<std::string, std::string>> payload;
  std::uint64_t timestamp = 0;  // simulation tick
  std::vector<std::uint8_t> signature;

  std::vector<std::uint8_t> signing_bytes() const;
  std::vector<std::uint8_t> canonical_bytes() const;
  crypto::Digest compute_id() const;

  static Transaction make_signed(const crypto::KeyPair& sender, const std::string& method,
                                 std::vector<std::pair<std::string, std::string>> payload,
                                 std::uint64_t tick);
  static Transaction decode(std::span<const std::uint8_t> bytes);  // strict, throws FormatError

  std::optional<std::string> field(const std::string& key) const;
};

struct Block {
  std::uint64_t height = 0;
  crypto::Digest previous_hash{};  // all zero for genesis
  std::vector<Transaction> transactions;
  std::string sealer;
  crypto::Digest hash{};

  // digest("HCBK" | height | previous_hash | tx ids | sealer)
  static crypto::Digest compute_hash(const Block& b);
};

// Returns the sender key after checking the signature; throws FormatError on
// a malformed transaction, AuthenticationError on a bad signature.
const std::vector<std::uint8_t>& get_sender_public_key(const Transaction& tx);

// ABI-style structured view of a transaction.
struct DecodedMethod {
  std::string method;
  std::map<std::string, std::string> fields;

  // Extracts area/patient ids when the payload carries an address.
  std::optional<PatientAddress> patient_address() const;
};

struct UnknownMethodError : std::runtime_error {
  explicit UnknownMethodError(const std::string& what) : std::runtime_error(what) {}
};

// Known methods: AddUser, DeleteUser, PolicyList, RetrieveEHRs, Penalty.
// Throws UnknownMethodError otherwise, or FormatError when required fields
// are missing.
DecodedMethod decode_method(const Transaction& tx);

enum class SubmitStatus { Accepted, BadSignature, DuplicateTxId };

struct ChainVerdict {
  bool ok = true;
  std::uint64_t corrupt_height = 0;  // first corrupted height when !ok
};

// Recomputes every hash link (tx ids, block hashes, prev pointers, heights)
// and re-checks every signature over a snapshot of blocks.
ChainVerdict verify_blocks(std::span<const Block> blocks);

// A registered network participant's replicated view of the chain.
struct Participant {
  std::string name;
  std::vector<Block> view;
};

// Hash-chained append-only ledger with proof-of-authority sealing: the
// configured sealers take turns producing one block per simulation tick.
class Ledger {
 public:
  explicit Ledger(std::vector<std::string> sealers);

  SubmitStatus submit(Transaction tx);

  // Seals all pending transactions (possibly none) into the next block, in
  // submission order, broadcasts it to every participant and advances the
  // simulation clock by one tick.
  const Block& seal_block();

  ChainVerdict verify_chain() const { return verify_blocks(blocks_); }

  std::size_t register_participant(const std::string& name);
  const Participant& participant(std::size_t index) const { return participants_.at(index); }
  std::size_t participant_count() const { return participants_.size(); }

  std::span<const Block> blocks() const { return blocks_; }
  std::size_t pending_count() const { return mempool_.size(); }
  // Total transactions ever accepted (sealed + pending).
  std::size_t transaction_count() const { return seen_tx_ids_.size(); }
  std::uint64_t now() const { return tick_; }

  // Newline-delimited JSON, one block per line, fixed field order.
  void export_ndjson(std::ostream& out) const;
  static Ledger import_ndjson(std::istream& in, std::vector<std::string> sealers);

 private:
  std::vector<std::string> sealers_;
  std::vector<Block> blocks_;
  std::vector<Transaction> mempool_;
  std::set<std::string> seen_tx_ids_;
  std::vector<Participant> participants_;
  std::uint64_t tick_ = 0;
};

}  // namespace hcsim
