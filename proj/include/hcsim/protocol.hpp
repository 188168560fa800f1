#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hcsim/contract.hpp"
#include "hcsim/crypto.hpp"
#include "hcsim/ledger.hpp"
#include "hcsim/storage.hpp"

namespace hcsim {

struct AccessRequest {
  std::vector<std::uint8_t> requester_public_key;
  PatientAddress address;
  std::string device_id;
  std::uint64_t tick = 0;

  void validate() const;  // well-formed address, device id present
};

enum class Verdict { Granted, Penalized };

struct AccessOutcome {
  Verdict verdict = Verdict::Penalized;
  std::optional<ContentHash> record_hash;  // set on grant
  std::optional<double> severity_score;    // decrypted result shown to the requester
  crypto::Digest tx_id{};                  // the one transaction this request appended
  std::string message;
  GasReceipt gas;  // RetrieveEHRs charge on grant, Penalty charge on deny
};

// Storage said integrity_error or not_found after the contract granted
// access: an infrastructure failure, deliberately distinct from a deny.
struct InfrastructureError : std::runtime_error {
  explicit InfrastructureError(const std::string& what) : std::runtime_error(what) {}
};

// Wires the EHRs-manager request intake to contract verification, CAS
// retrieval and the ledger append, including the unauthorized-penalty path.
// Requests are processed sequentially in arrival order.
class SharingSystem {
 public:
  SharingSystem(Ledger& ledger, SmartContract& contract, StorageCluster& storage,
                crypto::KeyPair admin_keys, crypto::KeyPair manager_keys,
                const crypto::KeyMaterial* record_key = nullptr);

  // Runs the access protocol end to end for one signed request. Exactly one
  // transaction is appended: the request itself on grant, a penalty record
  // on deny.
  AccessOutcome process_request(const AccessRequest& request, const crypto::KeyPair& requester);

  // Admin registration: add_user + policy bindings + a registration
  // transaction. Patients are always bound to their own address.
  Transaction register_user(const crypto::KeyPair& requester_admin,
                            const std::vector<std::uint8_t>& pk, Role role,
                            const std::vector<std::string>& patient_bindings,
                            const std::vector<std::string>& device_bindings,
                            std::optional<PatientAddress> own_address = std::nullopt);

  const std::vector<GasReceipt>& session_receipts() const { return session_receipts_; }

 private:
  Ledger& ledger_;
  SmartContract& contract_;
  StorageCluster& storage_;
  crypto::KeyPair admin_keys_;
  crypto::KeyPair manager_keys_;
  const crypto::KeyMaterial* record_key_;
  std::vector<GasReceipt> session_receipts_;
  // Distinguishes otherwise-identical transactions within one tick.
  std::uint64_t sequence_ = 0;
};

// Reference decision table for the verification chain: grant iff the key is
// registered, the patient address is bound and the device id is bound.
bool access_protocol_oracle(bool pk_registered, bool patient_bound, bool device_bound);

}  // namespace hcsim
