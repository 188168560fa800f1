#include "hcsim/contract.hpp"

#include <algorithm>

#include "hcsim/config.hpp"

namespace hcsim {

std::string to_string(Role role) {
  switch (role) {
    case Role::Patient: return "patient";
    case Role::Doctor: return "doctor";
    case Role::Caregiver: return "caregiver";
    case Role::Admin: return "admin";
    case Role::EhrsManager: return "ehrs_manager";
  }
  return "unknown";
}

std::optional<Role> role_from_string(const std::string& text) {
  if (text == "patient") return Role::Patient;
  if (text == "doctor") return Role::Doctor;
  if (text == "caregiver") return Role::Caregiver;
  if (text == "admin") return Role::Admin;
  if (text == "ehrs_manager") return Role::EhrsManager;
  return std::nullopt;
}

GasSchedule GasSchedule::load(const std::filesystem::path& path) {
  const KvFile kv = KvFile::parse_file(path);
  GasSchedule schedule;
  schedule.ether_per_gas = Decimal::parse(kv.require("rates", "ether_per_gas"));
  schedule.usd_per_ether = Decimal::parse(kv.require("rates", "usd_per_ether"));
  for (std::size_t occurrence : kv.section_occurrences("function")) {
    Function fn;
    fn.name = kv.require_at(occurrence, "name");
    fn.label = kv.require_at(occurrence, "label");
    fn.gas = parse_int(kv.require_at(occurrence, "gas"), "gas");
    fn.ether_decimals = static_cast<int>(parse_int(kv.require_at(occurrence, "ether_decimals"),
                                                   "ether_decimals"));
    if (fn.gas <= 0) throw ConfigError("gas for " + fn.name + " must be positive");
    schedule.functions.push_back(std::move(fn));
  }
  if (schedule.functions.empty()) throw ConfigError("gas schedule lists no functions");
  schedule.total_label = kv.get("total", "label").value_or("Total");
  schedule.total_ether_decimals =
      static_cast<int>(kv.get_int("total", "ether_decimals", schedule.total_ether_decimals));
  return schedule;
}

const GasSchedule::Function& GasSchedule::function(const std::string& name) const {
  for (const auto& fn : functions) {
    if (fn.name == name) return fn;
  }
  throw ConfigError("gas schedule has no function named '" + name + "'");
}

namespace {

GasReceipt build_receipt(const GasSchedule& schedule, const std::string& label, std::int64_t gas,
                         int ether_decimals) {
  GasReceipt r;
  r.function_label = label;
  r.gas_used = gas;
  r.ether_exact = Decimal::from_int(gas) * schedule.ether_per_gas;
  const Decimal displayed = r.ether_exact.truncate(ether_decimals);
  r.ether_display = displayed.to_string();
  r.usd_display = (displayed * schedule.usd_per_ether).to_trimmed_string();
  return r;
}

}  // namespace

GasReceipt make_receipt(const GasSchedule& schedule, const std::string& function_name) {
  const auto& fn = schedule.function(function_name);
  return build_receipt(schedule, fn.label, fn.gas, fn.ether_decimals);
}

GasReceipt total_receipt(const GasSchedule& schedule, const std::vector<GasReceipt>& receipts) {
  std::int64_t gas = 0;
  for (const auto& r : receipts) gas += r.gas_used;
  return build_receipt(schedule, schedule.total_label, gas, schedule.total_ether_decimals);
}

SmartContract::SmartContract(GasSchedule schedule, std::vector<std::uint8_t> admin_public_key)
    : schedule_(std::move(schedule)), admin_public_key_(std::move(admin_public_key)) {
  PolicyEntry admin;
  admin.public_key = admin_public_key_;
  admin.role = Role::Admin;
  policies_[crypto::hex(admin_public_key_)] = std::move(admin);
}

GasReceipt SmartContract::free_receipt(const std::string& label) {
  GasReceipt r;
  r.function_label = label;
  r.gas_used = 0;
  r.ether_exact = Decimal::from_int(0);
  r.ether_display = "0";
  r.usd_display = "0";
  return r;
}

bool SmartContract::is_admin(const std::vector<std::uint8_t>& caller) const {
  const PolicyEntry* entry = find(caller);
  return entry && entry->role == Role::Admin;
}

bool SmartContract::is_admin_or_manager(const std::vector<std::uint8_t>& caller) const {
  const PolicyEntry* entry = find(caller);
  return entry && (entry->role == Role::Admin || entry->role == Role::EhrsManager);
}

const PolicyEntry* SmartContract::find(const std::vector<std::uint8_t>& pk) const {
  const auto it = policies_.find(crypto::hex(pk));
  return it == policies_.end() ? nullptr : &it->second;
}

SmartContract::CallResult SmartContract::add_user(const std::vector<std::uint8_t>& caller,
                                                  const std::vector<std::uint8_t>& pk, Role role) {
  if (!is_admin(caller)) return {CallStatus::Unauthorized, free_receipt("AddUser")};
  const std::string key = crypto::hex(pk);
  if (policies_.count(key)) return {CallStatus::Duplicate, free_receipt("AddUser")};
  PolicyEntry entry;
  entry.public_key = pk;
  entry.role = role;
  policies_[key] = std::move(entry);
  return {CallStatus::Ok, charge("add_user")};
}

SmartContract::DeleteResult SmartContract::delete_user(const std::vector<std::uint8_t>& caller,
                                                       const std::vector<std::uint8_t>& pk) {
  DeleteResult out;
  if (!is_admin(caller)) {
    out.status = CallStatus::Unauthorized;
    out.receipt = free_receipt("DeleteUser");
    return out;
  }
  const auto it = policies_.find(crypto::hex(pk));
  if (it == policies_.end()) {
    out.status = CallStatus::UnknownKey;
    out.receipt = free_receipt("DeleteUser");
    return out;
  }
  // Personal records stored under the user's own patient bindings are
  // flagged for deletion in storage.
  if (it->second.role == Role::Patient) {
    out.purge_addresses.assign(it->second.bound_patients.begin(), it->second.bound_patients.end());
  }
  policies_.erase(it);
  out.status = CallStatus::Ok;
  out.receipt = charge("delete_user");
  return out;
}

SmartContract::QueryResult SmartContract::policy_list(const std::vector<std::uint8_t>& caller,
                                                      const std::vector<std::uint8_t>& pk) {
  QueryResult out;
  if (!is_admin_or_manager(caller)) {
    out.status = CallStatus::Unauthorized;
    out.receipt = free_receipt("PolicyList");
    return out;
  }
  out.member = policies_.count(crypto::hex(pk)) > 0;
  out.receipt = charge("policy_list");
  return out;
}

SmartContract::AccessResult SmartContract::retrieve_ehrs(const std::vector<std::uint8_t>& caller,
                                                         const std::vector<std::uint8_t>& requester_pk,
                                                         const PatientAddress& address,
                                                         const std::string& device_id) {
  AccessResult out;
  const PolicyEntry* caller_entry = find(caller);
  if (!caller_entry || caller_entry->role != Role::EhrsManager) {
    out.status = CallStatus::Unauthorized;
    out.receipt = free_receipt("RetrieveEHRs");
    return out;
  }
  const PolicyEntry* entry = find(requester_pk);
  const bool registered = entry != nullptr;
  const bool patient_bound = registered && entry->bound_patients.count(address.canonical()) > 0;
  const bool device_bound = registered && entry->bound_devices.count(device_id) > 0;
  out.granted = registered && patient_bound && device_bound;
  // Deny charges nothing here; the penalty function carries the deny-path
  // cost.
  out.receipt = out.granted ? charge("retrieve_ehrs") : free_receipt("RetrieveEHRs");
  return out;
}

SmartContract::CallResult SmartContract::penalty(const std::vector<std::uint8_t>& caller,
                                                 const std::vector<std::uint8_t>& offender_pk,
                                                 const std::string& action) {
  (void)offender_pk;
  (void)action;  // recorded by the caller in the penalty transaction
  if (!is_admin_or_manager(caller)) return {CallStatus::Unauthorized, free_receipt("Penalty")};
  return {CallStatus::Ok, charge("penalty")};
}

CallStatus SmartContract::bind(const std::vector<std::uint8_t>& caller,
                               const std::vector<std::uint8_t>& pk,
                               const std::vector<std::string>& patient_addresses,
                               const std::vector<std::string>& device_ids) {
  if (!is_admin(caller)) return CallStatus::Unauthorized;
  const auto it = policies_.find(crypto::hex(pk));
  if (it == policies_.end()) return CallStatus::UnknownKey;
  for (const auto& addr : patient_addresses) {
    PatientAddress::parse(addr);  // validates shape
    it->second.bound_patients.insert(addr);
  }
  for (const auto& device : device_ids) it->second.bound_devices.insert(device);
  return CallStatus::Ok;
}

}  // namespace hcsim
