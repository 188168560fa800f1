#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "hcsim/crypto.hpp"

using namespace hcsim::crypto;

namespace {

std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

KeyMaterial test_key() { return KeyMaterial::derive(7, "unit-test"); }

}  // namespace

TEST_CASE("sha256 known answer") {
  const std::uint8_t abc[] = {'a', 'b', 'c'};
  CHECK(hex(sha256(abc)) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("aes-128-gcm known answers (zero key, zero nonce)") {
  // Standard GCM validation cases: empty plaintext, then one zero block.
  KeyMaterial key = KeyMaterial::from_bytes("kat", std::vector<std::uint8_t>(16, 0));
  struct FixedNonce final : NonceSource {
    std::array<std::uint8_t, kNonceBytes> next() override { return {}; }
  } nonces;

  const Ciphertext empty = encrypt({}, key, nonces);
  CHECK(hex(empty.tag) == "58e2fccefa7e3061367f1d57a4e7455a");
  CHECK(empty.data.empty());

  const std::vector<std::uint8_t> zero_block(16, 0);
  const Ciphertext block = encrypt(zero_block, key, nonces);
  CHECK(hex(block.data) == "0388dace60b6a392f328c2b971b2fe78");
  CHECK(hex(block.tag) == "ab6e47d42cec13bdf53a67b21257bddf");
}

TEST_CASE("ed25519 known answer") {
  const auto seed = from_hex("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60");
  const KeyPair kp = KeyPair::from_seed(seed);
  CHECK(hex(kp.public_key) == "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  const auto sig = sign({}, kp);
  CHECK(hex(sig) ==
        "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e06522490155"
        "5fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b");
  CHECK(verify({}, sig, kp.public_key));
}

TEST_CASE("round trip across payload sizes") {
  DeterministicNonceSource nonces(1);
  const KeyMaterial key = test_key();
  std::mt19937_64 rng(99);
  for (std::size_t size : {std::size_t{0}, std::size_t{1}, std::size_t{17}, std::size_t{4096},
                           std::size_t{200 * 1000}, std::size_t{1200 * 1000}}) {
    const auto payload = random_bytes(rng, size);
    const Ciphertext c = encrypt(payload, key, nonces);
    CHECK(decrypt(c, key) == payload);
  }
}

TEST_CASE("wrong key fails authentication") {
  DeterministicNonceSource nonces(2);
  const KeyMaterial key = test_key();
  KeyMaterial other = KeyMaterial::derive(7, "other-key");
  const std::vector<std::uint8_t> payload{1, 2, 3, 4};
  Ciphertext c = encrypt(payload, key, nonces);
  // Same id, different bytes: the AEAD itself must reject.
  other.key_id = key.key_id;
  CHECK_THROWS_AS(decrypt(c, other), AuthenticationError);
}

TEST_CASE("key id mismatch is reported before decryption") {
  DeterministicNonceSource nonces(3);
  const KeyMaterial key = test_key();
  const Ciphertext c = encrypt(std::vector<std::uint8_t>{9, 9}, key, nonces);
  const KeyMaterial renamed = KeyMaterial::from_bytes("someone-else", key.key);
  CHECK_THROWS_AS(decrypt(c, renamed), AuthenticationError);
}

TEST_CASE("tampered tag fails authentication") {
  DeterministicNonceSource nonces(4);
  const KeyMaterial key = test_key();
  Ciphertext c = encrypt(std::vector<std::uint8_t>{5, 6, 7}, key, nonces);
  c.tag[0] ^= 0x01;
  CHECK_THROWS_AS(decrypt(c, key), AuthenticationError);
}

TEST_CASE("every single-bit flip of ciphertext or tag is rejected") {
  DeterministicNonceSource nonces(5);
  const KeyMaterial key = test_key();
  std::mt19937_64 rng(123);
  const auto payload = random_bytes(rng, 48);
  const Ciphertext original = encrypt(payload, key, nonces);
  for (std::size_t byte = 0; byte < original.data.size(); ++byte) {
    for (int bit = 0; bit < 8; ++bit) {
      Ciphertext c = original;
      c.data[byte] ^= static_cast<std::uint8_t>(1u << bit);
      CHECK_THROWS_AS(decrypt(c, key), AuthenticationError);
    }
  }
  for (std::size_t byte = 0; byte < original.tag.size(); ++byte) {
    for (int bit = 0; bit < 8; ++bit) {
      Ciphertext c = original;
      c.tag[byte] ^= static_cast<std::uint8_t>(1u << bit);
      CHECK_THROWS_AS(decrypt(c, key), AuthenticationError);
    }
  }
}

TEST_CASE("container layout golden") {
  // key "unit-test" derivation, seed-42 nonce stream, payload {1,2,3}.
  DeterministicNonceSource nonces(42);
  const KeyMaterial key = test_key();
  const Ciphertext c = encrypt(std::vector<std::uint8_t>{1, 2, 3}, key, nonces);
  const auto bytes = c.serialize();
  CHECK(hex(bytes) ==
        "48435831"                    // magic "HCX1"
        "0d000000"                    // key id length 13
        "6b65793a756e69742d74657374"  // "key:unit-test"
        "0c" "aefdce03def94ffed42159e5"          // nonce length + nonce
        "10" "c1f548767baef1e19b45c749b5e9be30"  // tag length + tag
        "0300000000000000"            // payload length
        "a3a2dc");                    // encrypted payload
  const Ciphertext back = Ciphertext::deserialize(bytes);
  CHECK(back.key_id == c.key_id);
  CHECK(back.nonce == c.nonce);
  CHECK(back.tag == c.tag);
  CHECK(back.data == c.data);
  CHECK(decrypt(back, key) == std::vector<std::uint8_t>{1, 2, 3});
}

TEST_CASE("container serialization round trip on random payloads") {
  DeterministicNonceSource nonces(6);
  const KeyMaterial key = test_key();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const auto payload = random_bytes(rng, rng() % 512);
    const Ciphertext c = encrypt(payload, key, nonces);
    const auto bytes = c.serialize();
    const Ciphertext back = Ciphertext::deserialize(bytes);
    CHECK(back.serialize() == bytes);
    CHECK(decrypt(back, key) == payload);
  }
}

TEST_CASE("deserialize rejects malformed containers") {
  DeterministicNonceSource nonces(8);
  const auto bytes = encrypt(std::vector<std::uint8_t>{1}, test_key(), nonces).serialize();
  CHECK_THROWS_AS(Ciphertext::deserialize(std::span(bytes).first(bytes.size() - 1)), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(Ciphertext::deserialize(bad_magic), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(Ciphertext::deserialize(trailing), FormatError);
}

TEST_CASE("deterministic nonce source: seeded, fresh per call") {
  DeterministicNonceSource a(10), b(10), c(11);
  const auto a1 = a.next();
  const auto a2 = a.next();
  CHECK(a1 != a2);
  CHECK(a1 == b.next());
  CHECK(a2 == b.next());
  CHECK(a1 != c.next());
}

TEST_CASE("entropy nonces differ across calls") {
  EntropyNonceSource src;
  CHECK(src.next() != src.next());
}

TEST_CASE("key material validation") {
  CHECK_THROWS_AS(KeyMaterial::from_bytes("bad", std::vector<std::uint8_t>(15, 1)),
                  std::invalid_argument);
  CHECK(KeyMaterial::derive(1, "a", 256).key.size() == 32);
  CHECK_THROWS_AS(KeyMaterial::derive(1, "a", 192), std::invalid_argument);
}

TEST_CASE("signature rejects forgery and cross-key verification") {
  const KeyPair alice = KeyPair::derive(1, "alice");
  const KeyPair mallory = KeyPair::derive(1, "mallory");
  const std::vector<std::uint8_t> msg{'h', 'i'};
  const auto sig = sign(msg, alice);
  CHECK(verify(msg, sig, alice.public_key));
  CHECK_FALSE(verify(msg, sig, mallory.public_key));
  CHECK_FALSE(verify(std::vector<std::uint8_t>{'h', 'o'}, sig, alice.public_key));
  auto bent = sig;
  bent[10] ^= 0x40;
  CHECK_FALSE(verify(msg, bent, alice.public_key));
}
