#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcsim::crypto {

inline constexpr std::size_t kNonceBytes = 12;
inline constexpr std::size_t kTagBytes = 16;
inline constexpr std::size_t kDigestBytes = 32;
inline constexpr std::size_t kSignatureBytes = 64;
inline constexpr std::size_t kPublicKeyBytes = 32;

using Digest = std::array<std::uint8_t, kDigestBytes>;

Digest sha256(std::span<const std::uint8_t> data);
std::string hex(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> from_hex(std::string_view text);

// Decryption or signature check failed; in scenario terms this is the
// external-attack signal, not a programming error.
struct AuthenticationError : std::runtime_error {
  explicit AuthenticationError(const std::string& what) : std::runtime_error(what) {}
};

struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Nonce supplier for encrypt(). Deterministic mode derives a fresh nonce per
// call from (seed, counter); entropy mode reads the OS RNG. Both are safe to
// share across threads.
class NonceSource {
 public:
  virtual ~NonceSource() = default;
  virtual std::array<std::uint8_t, kNonceBytes> next() = 0;
};

class DeterministicNonceSource final : public NonceSource {
 public:
  explicit DeterministicNonceSource(std::uint64_t seed) : seed_(seed) {}
  std::array<std::uint8_t, kNonceBytes> next() override;

 private:
  std::mutex mutex_;
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

class EntropyNonceSource final : public NonceSource {
 public:
  std::array<std::uint8_t, kNonceBytes> next() override;
};

// Symmetric key for record/task encryption. 128-bit by default; key bytes
// stay out of every serialized artifact except the keyfile itself.
struct KeyMaterial {
  std::string key_id;
  std::vector<std::uint8_t> key;
  std::uint64_t created_tick = 0;

  // Deterministic derivation from a master seed and a label, so scenario
  // keys are a pure function of the run seed.
  static KeyMaterial derive(std::uint64_t seed, const std::string& label, int bits = 128,
                            std::uint64_t tick = 0);
  static KeyMaterial from_bytes(std::string key_id, std::vector<std::uint8_t> key,
                                std::uint64_t tick = 0);
};

// Authenticated ciphertext container.
//
// Serialized layout (little-endian, golden-tested):
//   magic   "HCX1"                      4 bytes
//   u32     key_id length               | key_id bytes
//   u8      nonce length (12)           | nonce bytes
//   u8      tag length (16)             | tag bytes
//   u64     payload length              | encrypted payload bytes
struct Ciphertext {
  std::string key_id;
  std::array<std::uint8_t, kNonceBytes> nonce{};
  std::array<std::uint8_t, kTagBytes> tag{};
  std::vector<std::uint8_t> data;

  std::vector<std::uint8_t> serialize() const;
  static Ciphertext deserialize(std::span<const std::uint8_t> bytes);
};

Ciphertext encrypt(std::span<const std::uint8_t> payload, const KeyMaterial& key, NonceSource& nonces);
std::vector<std::uint8_t> decrypt(const Ciphertext& c, const KeyMaterial& key);

// Ed25519 identity used for transaction signing.
struct KeyPair {
  std::vector<std::uint8_t> public_key;   // 32 bytes
  std::vector<std::uint8_t> private_seed; // 32 bytes

  static KeyPair from_seed(std::span<const std::uint8_t> seed32);
  static KeyPair derive(std::uint64_t seed, const std::string& label);
};

std::vector<std::uint8_t> sign(std::span<const std::uint8_t> message, const KeyPair& signer);
bool verify(std::span<const std::uint8_t> message, std::span<const std::uint8_t> signature,
            std::span<const std::uint8_t> public_key);

}  // namespace hcsim::crypto
