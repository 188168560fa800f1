#include "hcsim/protocol.hpp"

namespace hcsim {

void AccessRequest::validate() const {
  address.canonical();  // throws when either part is empty
  if (device_id.empty()) throw std::invalid_argument("access request must specify a device id");
  if (requester_public_key.size() != crypto::kPublicKeyBytes) {
    throw std::invalid_argument("access request carries a malformed public key");
  }
}

bool access_protocol_oracle(bool pk_registered, bool patient_bound, bool device_bound) {
  return pk_registered && patient_bound && device_bound;
}

SharingSystem::SharingSystem(Ledger& ledger, SmartContract& contract, StorageCluster& storage,
                             crypto::KeyPair admin_keys, crypto::KeyPair manager_keys,
                             const crypto::KeyMaterial* record_key)
    : ledger_(ledger),
      contract_(contract),
      storage_(storage),
      admin_keys_(std::move(admin_keys)),
      manager_keys_(std::move(manager_keys)),
      record_key_(record_key) {}

AccessOutcome SharingSystem::process_request(const AccessRequest& request,
                                             const crypto::KeyPair& requester) {
  request.validate();
  if (requester.public_key != request.requester_public_key) {
    throw std::invalid_argument("request public key does not match the signing identity");
  }

  // Step 1: the request reaches the EHRs manager as a signed transaction.
  const std::string sequence = std::to_string(sequence_++);
  Transaction request_tx = Transaction::make_signed(
      requester, "RetrieveEHRs",
      {{"area_id", request.address.area_id},
       {"patient_id", request.address.patient_id},
       {"device_id", request.device_id},
       {"nonce", sequence}},
      request.tick);
  const std::vector<std::uint8_t>& pk = get_sender_public_key(request_tx);

  // Steps 2-3: contract verification against the policy list, then the
  // address/device fields decoded from the transaction itself.
  const DecodedMethod decoded = decode_method(request_tx);
  const PatientAddress address = *decoded.patient_address();
  const std::string device_id = decoded.fields.at("device_id");
  const SmartContract::AccessResult access =
      contract_.retrieve_ehrs(manager_keys_.public_key, pk, address, device_id);
  if (access.status != CallStatus::Ok) {
    throw std::invalid_argument("EHRs manager identity is not registered with the contract");
  }

  AccessOutcome outcome;
  if (access.granted) {
    // Step 3-4: manager pulls the record from storage and feeds it back.
    const FetchResult fetched = storage_.fetch(address);
    if (fetched.status == FetchStatus::IntegrityError) {
      throw InfrastructureError("stored record failed its hash check for " + address.canonical());
    }
    if (fetched.status == FetchStatus::NotFound) {
      throw InfrastructureError("no stored record for " + address.canonical());
    }
    if (ledger_.submit(request_tx) != SubmitStatus::Accepted) {
      throw InfrastructureError("ledger rejected the access transaction");
    }
    outcome.verdict = Verdict::Granted;
    outcome.record_hash = fetched.hash;
    outcome.tx_id = request_tx.tx_id;
    outcome.message = "access granted for " + address.canonical();
    outcome.gas = access.receipt;
    if (record_key_) {
      const auto content_bytes =
          crypto::decrypt(crypto::Ciphertext::deserialize(fetched.record.body), *record_key_);
      outcome.severity_score = RecordContent::from_bytes(content_bytes).severity_score;
    }
  } else {
    // Deny: the request is discarded and a warning-message penalty is
    // recorded instead.
    const SmartContract::CallResult penalty =
        contract_.penalty(manager_keys_.public_key, pk, "unauthorized EHR access attempt");
    if (penalty.status != CallStatus::Ok) {
      throw InfrastructureError("penalty path rejected for the manager identity");
    }
    Transaction penalty_tx = Transaction::make_signed(
        admin_keys_, "Penalty",
        {{"pk", crypto::hex(pk)},
         {"action", "warning"},
         {"area_id", address.area_id},
         {"patient_id", address.patient_id},
         {"nonce", sequence}},
        request.tick);
    if (ledger_.submit(penalty_tx) != SubmitStatus::Accepted) {
      throw InfrastructureError("ledger rejected the penalty transaction");
    }
    outcome.verdict = Verdict::Penalized;
    outcome.tx_id = penalty_tx.tx_id;
    outcome.message = "warning: unauthorized request for " + address.canonical();
    outcome.gas = penalty.receipt;
  }
  session_receipts_.push_back(outcome.gas);
  return outcome;
}

Transaction SharingSystem::register_user(const crypto::KeyPair& requester_admin,
                                         const std::vector<std::uint8_t>& pk, Role role,
                                         const std::vector<std::string>& patient_bindings,
                                         const std::vector<std::string>& device_bindings,
                                         std::optional<PatientAddress> own_address) {
  const SmartContract::CallResult added = contract_.add_user(requester_admin.public_key, pk, role);
  if (added.status == CallStatus::Duplicate) {
    throw std::invalid_argument("public key already registered");
  }
  if (added.status != CallStatus::Ok) {
    throw std::invalid_argument("registration requires the admin identity");
  }
  std::vector<std::string> bindings = patient_bindings;
  if (role == Role::Patient) {
    if (!own_address) throw std::invalid_argument("patient registration needs the patient's address");
    bindings.push_back(own_address->canonical());
  }
  if (contract_.bind(requester_admin.public_key, pk, bindings, device_bindings) != CallStatus::Ok) {
    throw std::invalid_argument("binding update rejected");
  }
  session_receipts_.push_back(added.receipt);

  Transaction tx = Transaction::make_signed(requester_admin, "AddUser",
                                            {{"pk", crypto::hex(pk)}, {"role", to_string(role)}},
                                            ledger_.now());
  if (ledger_.submit(tx) != SubmitStatus::Accepted) {
    throw InfrastructureError("ledger rejected the registration transaction");
  }
  return tx;
}

}  // namespace hcsim
