#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hcsim/decimal.hpp"
#include "hcsim/ledger.hpp"

namespace hcsim {

enum class Role { Patient, Doctor, Caregiver, Admin, EhrsManager };

std::string to_string(Role role);
std::optional<Role> role_from_string(const std::string& text);

// One entry per public key. Patients carry their own address in
// bound_patients; a doctor's bound_patients are the patients who authorized
// them.
struct PolicyEntry {
  std::vector<std::uint8_t> public_key;
  Role role = Role::Patient;
  std::set<std::string> bound_patients;  // canonical "AreaID:PatientID"
  std::set<std::string> bound_devices;
};

// Gas constants and exchange rates, loaded from the schedule config. Gas is
// data here: the simulator reproduces accounting, not EVM execution.
struct GasSchedule {
  struct Function {
    std::string name;         // contract operation name
    std::string label;        // published row label used in receipts/CSV
    std::int64_t gas = 0;
    int ether_decimals = 0;   // display precision of the ether column
  };

  std::vector<Function> functions;  // schedule order = published row order
  Decimal ether_per_gas;
  Decimal usd_per_ether;
  std::string total_label = "Total";
  int total_ether_decimals = 4;

  static GasSchedule load(const std::filesystem::path& path);
  const Function& function(const std::string& name) const;
};

// ether_exact = gas * rate; the display string truncates to the schedule's
// per-row precision; usd = displayed ether * usd rate, all in exact decimal.
struct GasReceipt {
  std::string function_label;
  std::int64_t gas_used = 0;
  Decimal ether_exact;
  std::string ether_display;
  std::string usd_display;
};

GasReceipt make_receipt(const GasSchedule& schedule, const std::string& function_name);
// Session-total row across receipts (gas summed, then the same pipeline).
GasReceipt total_receipt(const GasSchedule& schedule, const std::vector<GasReceipt>& receipts);

enum class CallStatus { Ok, Unauthorized, Duplicate, UnknownKey };

// Deterministic state machine behind the five access-control functions.
// Rejected calls leave state untouched and charge no gas.
class SmartContract {
 public:
  SmartContract(GasSchedule schedule, std::vector<std::uint8_t> admin_public_key);

  struct CallResult {
    CallStatus status = CallStatus::Ok;
    GasReceipt receipt;
  };

  struct DeleteResult {
    CallStatus status = CallStatus::Ok;
    GasReceipt receipt;
    // Patient addresses whose stored records must be purged from storage.
    std::vector<std::string> purge_addresses;
  };

  struct QueryResult {
    CallStatus status = CallStatus::Ok;
    bool member = false;
    GasReceipt receipt;
  };

  struct AccessResult {
    CallStatus status = CallStatus::Ok;
    bool granted = false;
    GasReceipt receipt;  // gas charged only on the grant path
  };

  // Admin only.
  CallResult add_user(const std::vector<std::uint8_t>& caller,
                      const std::vector<std::uint8_t>& pk, Role role);
  // Admin only; unknown key is an error.
  DeleteResult delete_user(const std::vector<std::uint8_t>& caller,
                           const std::vector<std::uint8_t>& pk);
  // Admin or EHRs manager.
  QueryResult policy_list(const std::vector<std::uint8_t>& caller,
                          const std::vector<std::uint8_t>& pk);
  // EHRs manager routing; grant iff the requester is registered and both the
  // patient address and device id are bound to them.
  AccessResult retrieve_ehrs(const std::vector<std::uint8_t>& caller,
                             const std::vector<std::uint8_t>& requester_pk,
                             const PatientAddress& address, const std::string& device_id);
  // Admin or EHRs manager; records the warning-message penalty charge.
  CallResult penalty(const std::vector<std::uint8_t>& caller,
                     const std::vector<std::uint8_t>& offender_pk, const std::string& action);

  // Policy bindings are administrative storage updates outside the five
  // metered functions (no gas).
  CallStatus bind(const std::vector<std::uint8_t>& caller, const std::vector<std::uint8_t>& pk,
                  const std::vector<std::string>& patient_addresses,
                  const std::vector<std::string>& device_ids);

  const PolicyEntry* find(const std::vector<std::uint8_t>& pk) const;
  std::size_t policy_count() const { return policies_.size(); }
  const GasSchedule& schedule() const { return schedule_; }
  const std::vector<std::uint8_t>& admin_key() const { return admin_public_key_; }

 private:
  bool is_admin(const std::vector<std::uint8_t>& caller) const;
  bool is_admin_or_manager(const std::vector<std::uint8_t>& caller) const;
  GasReceipt charge(const std::string& function_name) { return make_receipt(schedule_, function_name); }
  static GasReceipt free_receipt(const std::string& label);

  GasSchedule schedule_;
  std::vector<std::uint8_t> admin_public_key_;
  std::map<std::string, PolicyEntry> policies_;  // keyed by hex(pk)
};

}  // namespace hcsim
