#include "hcsim/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cstring>

namespace hcsim::crypto {

namespace {

struct EvpCipherCtx {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  ~EvpCipherCtx() { EVP_CIPHER_CTX_free(ctx); }
};

struct EvpMdCtx {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  ~EvpMdCtx() { EVP_MD_CTX_free(ctx); }
};

struct EvpPkey {
  EVP_PKEY* key = nullptr;
  ~EvpPkey() { EVP_PKEY_free(key); }
};

const EVP_CIPHER* gcm_for_key(std::size_t key_bytes) {
  switch (key_bytes) {
    case 16: return EVP_aes_128_gcm();
    case 32: return EVP_aes_256_gcm();
    default: throw std::invalid_argument("key length must be 128 or 256 bits");
  }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    auto b = take(4);
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    auto b = take(8);
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated buffer");
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Digest sha256(std::span<const std::uint8_t> data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != kDigestBytes) {
    throw std::runtime_error("sha256 failed");
  }
  return out;
}

std::string hex(std::span<const std::uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out += digits[b >> 4];
    out += digits[b & 0xf];
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view text) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (text.size() % 2 != 0) throw FormatError("odd-length hex string");
  std::vector<std::uint8_t> out(text.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = nibble(text[2 * i]);
    const int lo = nibble(text[2 * i + 1]);
    if (hi < 0 || lo < 0) throw FormatError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

std::array<std::uint8_t, kNonceBytes> DeterministicNonceSource::next() {
  std::lock_guard lock(mutex_);
  std::vector<std::uint8_t> material;
  material.reserve(16);
  put_u64(material, seed_);
  put_u64(material, counter_++);
  const Digest d = sha256(material);
  std::array<std::uint8_t, kNonceBytes> nonce{};
  std::memcpy(nonce.data(), d.data(), kNonceBytes);
  return nonce;
}

std::array<std::uint8_t, kNonceBytes> EntropyNonceSource::next() {
  std::array<std::uint8_t, kNonceBytes> nonce{};
  if (RAND_bytes(nonce.data(), nonce.size()) != 1) throw std::runtime_error("OS entropy unavailable");
  return nonce;
}

KeyMaterial KeyMaterial::derive(std::uint64_t seed, const std::string& label, int bits,
                                std::uint64_t tick) {
  if (bits != 128 && bits != 256) throw std::invalid_argument("key length must be 128 or 256 bits");
  std::vector<std::uint8_t> material;
  put_u64(material, seed);
  material.insert(material.end(), label.begin(), label.end());
  Digest d = sha256(material);
  std::vector<std::uint8_t> key(d.begin(), d.begin() + bits / 8);
  return from_bytes("key:" + label, std::move(key), tick);
}

KeyMaterial KeyMaterial::from_bytes(std::string key_id, std::vector<std::uint8_t> key,
                                    std::uint64_t tick) {
  if (key.size() != 16 && key.size() != 32) {
    throw std::invalid_argument("key length must be 128 or 256 bits");
  }
  return KeyMaterial{std::move(key_id), std::move(key), tick};
}

std::vector<std::uint8_t> Ciphertext::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 + key_id.size() + 1 + nonce.size() + 1 + tag.size() + 8 + data.size());
  out.insert(out.end(), {'H', 'C', 'X', '1'});
  put_u32(out, static_cast<std::uint32_t>(key_id.size()));
  out.insert(out.end(), key_id.begin(), key_id.end());
  out.push_back(static_cast<std::uint8_t>(nonce.size()));
  out.insert(out.end(), nonce.begin(), nonce.end());
  out.push_back(static_cast<std::uint8_t>(tag.size()));
  out.insert(out.end(), tag.begin(), tag.end());
  put_u64(out, data.size());
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

Ciphertext Ciphertext::deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(4);
  if (std::memcmp(magic.data(), "HCX1", 4) != 0) throw FormatError("bad ciphertext magic");
  Ciphertext c;
  const std::uint32_t id_len = r.u32();
  auto id = r.take(id_len);
  c.key_id.assign(id.begin(), id.end());
  if (r.u8() != kNonceBytes) throw FormatError("unexpected nonce length");
  auto nonce = r.take(kNonceBytes);
  std::copy(nonce.begin(), nonce.end(), c.nonce.begin());
  if (r.u8() != kTagBytes) throw FormatError("unexpected tag length");
  auto tag = r.take(kTagBytes);
  std::copy(tag.begin(), tag.end(), c.tag.begin());
  const std::uint64_t len = r.u64();
  auto data = r.take(len);
  c.data.assign(data.begin(), data.end());
  if (!r.done()) throw FormatError("trailing bytes after ciphertext");
  return c;
}

Ciphertext encrypt(std::span<const std::uint8_t> payload, const KeyMaterial& key, NonceSource& nonces) {
  Ciphertext c;
  c.key_id = key.key_id;
  c.nonce = nonces.next();
  c.data.resize(payload.size());

  EvpCipherCtx ctx;
  int len = 0;
  if (EVP_EncryptInit_ex(ctx.ctx, gcm_for_key(key.key.size()), nullptr, key.key.data(),
                         c.nonce.data()) != 1) {
    throw std::runtime_error("encrypt init failed");
  }
  if (!payload.empty() &&
      EVP_EncryptUpdate(ctx.ctx, c.data.data(), &len, payload.data(),
                        static_cast<int>(payload.size())) != 1) {
    throw std::runtime_error("encrypt failed");
  }
  int final_len = 0;
  if (EVP_EncryptFinal_ex(ctx.ctx, c.data.data() + len, &final_len) != 1) {
    throw std::runtime_error("encrypt finalize failed");
  }
  if (EVP_CIPHER_CTX_ctrl(ctx.ctx, EVP_CTRL_GCM_GET_TAG, kTagBytes, c.tag.data()) != 1) {
    throw std::runtime_error("tag extraction failed");
  }
  return c;
}

std::vector<std::uint8_t> decrypt(const Ciphertext& c, const KeyMaterial& key) {
  if (c.key_id != key.key_id) {
    throw AuthenticationError("key id mismatch: ciphertext was sealed under '" + c.key_id + "'");
  }
  std::vector<std::uint8_t> plain(c.data.size());
  EvpCipherCtx ctx;
  int len = 0;
  if (EVP_DecryptInit_ex(ctx.ctx, gcm_for_key(key.key.size()), nullptr, key.key.data(),
                         c.nonce.data()) != 1) {
    throw std::runtime_error("decrypt init failed");
  }
  if (!c.data.empty() &&
      EVP_DecryptUpdate(ctx.ctx, plain.data(), &len, c.data.data(),
                        static_cast<int>(c.data.size())) != 1) {
    throw AuthenticationError("ciphertext rejected");
  }
  std::array<std::uint8_t, kTagBytes> tag = c.tag;
  if (EVP_CIPHER_CTX_ctrl(ctx.ctx, EVP_CTRL_GCM_SET_TAG, kTagBytes, tag.data()) != 1) {
    throw std::runtime_error("tag set failed");
  }
  int final_len = 0;
  if (EVP_DecryptFinal_ex(ctx.ctx, plain.data() + len, &final_len) != 1) {
    throw AuthenticationError("authentication failed: data or tag tampered, or wrong key");
  }
  return plain;
}

KeyPair KeyPair::from_seed(std::span<const std::uint8_t> seed32) {
  if (seed32.size() != 32) throw std::invalid_argument("signing seed must be 32 bytes");
  EvpPkey pkey;
  pkey.key = EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed32.data(), seed32.size());
  if (!pkey.key) throw std::runtime_error("ed25519 key creation failed");
  std::size_t pub_len = kPublicKeyBytes;
  std::vector<std::uint8_t> pub(pub_len);
  if (EVP_PKEY_get_raw_public_key(pkey.key, pub.data(), &pub_len) != 1 || pub_len != kPublicKeyBytes) {
    throw std::runtime_error("ed25519 public key extraction failed");
  }
  return KeyPair{std::move(pub), std::vector<std::uint8_t>(seed32.begin(), seed32.end())};
}

KeyPair KeyPair::derive(std::uint64_t seed, const std::string& label) {
  std::vector<std::uint8_t> material;
  put_u64(material, seed);
  material.insert(material.end(), {'s', 'i', 'g', ':'});
  material.insert(material.end(), label.begin(), label.end());
  const Digest d = sha256(material);
  return from_seed(d);
}

std::vector<std::uint8_t> sign(std::span<const std::uint8_t> message, const KeyPair& signer) {
  EvpPkey pkey;
  pkey.key = EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, signer.private_seed.data(),
                                          signer.private_seed.size());
  if (!pkey.key) throw std::runtime_error("ed25519 key load failed");
  EvpMdCtx ctx;
  if (EVP_DigestSignInit(ctx.ctx, nullptr, nullptr, nullptr, pkey.key) != 1) {
    throw std::runtime_error("sign init failed");
  }
  std::size_t sig_len = kSignatureBytes;
  std::vector<std::uint8_t> sig(sig_len);
  if (EVP_DigestSign(ctx.ctx, sig.data(), &sig_len, message.data(), message.size()) != 1 ||
      sig_len != kSignatureBytes) {
    throw std::runtime_error("sign failed");
  }
  return sig;
}

bool verify(std::span<const std::uint8_t> message, std::span<const std::uint8_t> signature,
            std::span<const std::uint8_t> public_key) {
  if (signature.size() != kSignatureBytes || public_key.size() != kPublicKeyBytes) return false;
  EvpPkey pkey;
  pkey.key = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(),
                                         public_key.size());
  if (!pkey.key) return false;
  EvpMdCtx ctx;
  if (EVP_DigestVerifyInit(ctx.ctx, nullptr, nullptr, nullptr, pkey.key) != 1) return false;
  return EVP_DigestVerify(ctx.ctx, signature.data(), signature.size(), message.data(),
                          message.size()) == 1;
}

}  // namespace hcsim::crypto
