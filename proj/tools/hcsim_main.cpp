// hcsim: deterministic simulator for privacy-aware edge offloading of
// healthcare tasks plus ledger-backed record sharing.
//
// Exit codes: 0 success, 2 infeasible offloading instance, 3 integrity
// violation detected, 4 config error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "hcsim/config.hpp"
#include "hcsim/scenario.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitIntegrity = 3;
constexpr int kExitConfig = 4;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

fs::path default_data_dir() { return fs::path(HCSIM_DATA_DIR); }

hcsim::ScenarioConfig load_config(const GlobalOptions& g) {
  const fs::path path = g.config_path.empty() ? default_data_dir() / "scenario.example.conf"
                                              : fs::path(g.config_path);
  hcsim::ScenarioConfig cfg = hcsim::ScenarioConfig::load(path);
  if (g.seed_set) {
    cfg.seed = g.seed;
    cfg.pso.rng_seed = g.seed;
  }
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  return cfg;
}

ordered_json decision_json(const hcsim::OffloadDecision& d) {
  ordered_json j;
  ordered_json x = ordered_json::array();
  for (auto bit : d.x) x.push_back(static_cast<int>(bit));
  j["x"] = std::move(x);
  j["objective"] = d.objective;
  j["feasible"] = d.feasible;
  ordered_json slacks;
  const auto entry = [](const hcsim::ConstraintReport::Entry& e) {
    ordered_json je;
    je["satisfied"] = e.satisfied;
    je["lhs"] = e.lhs;
    je["rhs"] = e.rhs;
    je["slack"] = e.slack();
    return je;
  };
  slacks["c1_offload_time"] = entry(d.report.c1_offload_time_tradeoff);
  slacks["c2_offload_energy"] = entry(d.report.c2_offload_energy_tradeoff);
  slacks["c3_latency_budget"] = entry(d.report.c3_latency_budget);
  slacks["c4_memory_budget"] = entry(d.report.c4_memory_budget);
  j["constraints"] = std::move(slacks);
  return j;
}

int cmd_calibrate(const GlobalOptions& g) {
  const hcsim::ScenarioConfig cfg = load_config(g);
  const auto calibration = hcsim::OffloadCalibration::load(cfg.offload_anchors, cfg.hardware);
  calibration.print_audit(std::cout);
  return kExitOk;
}

int cmd_offload(const GlobalOptions& g, const std::string& instance_path, bool exact) {
  const hcsim::ScenarioConfig cfg = load_config(g);
  if (!instance_path.empty()) {
    const hcsim::InstanceFile inst = hcsim::InstanceFile::load(instance_path);
    hcsim::OffloadDecision decision =
        exact ? hcsim::brute_force_solve(inst.tasks, inst.weights, inst.bounds)
              : hcsim::solve_pso(inst.tasks, inst.weights, inst.bounds, cfg.pso);
    std::cout << decision_json(decision).dump() << "\n";
    fs::create_directories(cfg.out_dir);
    std::ofstream csv(cfg.out_dir / "decision.csv");
    csv << "# schema: decision v1\n";
    csv << "task_id,x\n";
    for (std::size_t i = 0; i < inst.tasks.size(); ++i) {
      csv << inst.tasks[i].task_id << "," << static_cast<int>(decision.x[i]) << "\n";
    }
    std::ofstream js(cfg.out_dir / "decision.json");
    js << decision_json(decision).dump(2) << "\n";
    return decision.feasible ? kExitOk : kExitInfeasible;
  }

  const auto calibration = hcsim::OffloadCalibration::load(cfg.offload_anchors, cfg.hardware);
  fs::create_directories(cfg.out_dir);
  std::ofstream runlog(cfg.out_dir / "offload_run.log");
  calibration.print_audit(runlog);
  const hcsim::MetricsReport report = hcsim::run_offload_experiment(cfg, calibration, runlog);
  hcsim::emit_report(report, cfg.out_dir, hcsim::ReportFormat::Csv);
  hcsim::emit_report(report, cfg.out_dir, hcsim::ReportFormat::Plotfile);
  std::cout << "offload grid: " << report.offload_grid.size() << " cells -> "
            << (cfg.out_dir / "offload_grid.csv").string() << "\n";
  return kExitOk;
}

int cmd_share(const GlobalOptions& g) {
  const hcsim::ScenarioConfig cfg = load_config(g);
  fs::create_directories(cfg.out_dir);
  std::ofstream runlog(cfg.out_dir / "sharing_run.log");
  const hcsim::MetricsReport report = hcsim::run_sharing_experiment(cfg, cfg.out_dir, runlog);
  hcsim::emit_report(report, cfg.out_dir, hcsim::ReportFormat::Csv);
  hcsim::emit_report(report, cfg.out_dir, hcsim::ReportFormat::Plotfile);
  std::cout << "sharing experiment: " << report.outcomes.size() << " requests, "
            << report.sealed_blocks << " blocks -> " << cfg.out_dir.string() << "\n";
  return kExitOk;
}

int cmd_gas(const GlobalOptions& g) {
  const hcsim::ScenarioConfig cfg = load_config(g);
  fs::create_directories(cfg.out_dir);
  std::ofstream runlog(cfg.out_dir / "sharing_run.log");
  const hcsim::MetricsReport report =
      hcsim::run_sharing_experiment(cfg, cfg.out_dir, runlog, /*persist_artifacts=*/false);
  hcsim::MetricsReport gas_only;
  gas_only.gas_rows = report.gas_rows;
  hcsim::emit_report(gas_only, cfg.out_dir, hcsim::ReportFormat::Csv);
  for (const auto& row : report.gas_rows) {
    std::cout << row.function_label << "," << row.gas_used << "," << row.ether_display << ","
              << row.usd_display << "\n";
  }
  return kExitOk;
}

int cmd_request(const GlobalOptions& g, const std::string& requester_label,
                const std::string& keyfile, const std::string& area, const std::string& patient,
                const std::string& device) {
  const hcsim::ScenarioConfig cfg = load_config(g);

  // Rebuild the configured scenario state, then play one extra request.
  const auto world = hcsim::SharingWorld::create(cfg, nullptr);

  const hcsim::crypto::KeyPair requester =
      keyfile.empty() ? hcsim::crypto::KeyPair::derive(cfg.seed, requester_label)
                      : [&] {
                          std::ifstream in(keyfile);
                          if (!in) throw hcsim::ConfigError("cannot open keyfile: " + keyfile);
                          std::string hex_text;
                          in >> hex_text;
                          return hcsim::crypto::KeyPair::from_seed(hcsim::crypto::from_hex(hex_text));
                        }();

  hcsim::AccessRequest req{requester.public_key, hcsim::PatientAddress{area, patient}, device,
                           world->ledger.now()};
  const hcsim::AccessOutcome outcome = world->system.process_request(req, requester);
  world->ledger.seal_block();

  ordered_json j;
  j["verdict"] = outcome.verdict == hcsim::Verdict::Granted ? "granted" : "penalized";
  j["message"] = outcome.message;
  j["tx_id"] = hcsim::crypto::hex(outcome.tx_id);
  if (outcome.record_hash) j["record_hash"] = outcome.record_hash->to_hex();
  if (outcome.severity_score) j["severity_score"] = *outcome.severity_score;
  j["gas_used"] = outcome.gas.gas_used;
  std::cout << j.dump() << "\n";
  return kExitOk;
}

hcsim::crypto::KeyMaterial store_key(const hcsim::ScenarioConfig& cfg, const std::string& keyfile) {
  if (keyfile.empty()) {
    return hcsim::crypto::KeyMaterial::derive(cfg.seed, "record-key", cfg.key_bits);
  }
  std::ifstream in(keyfile);
  if (!in) throw hcsim::ConfigError("cannot open keyfile: " + keyfile);
  std::string hex_text;
  in >> hex_text;
  return hcsim::crypto::KeyMaterial::from_bytes("key:file", hcsim::crypto::from_hex(hex_text));
}

int cmd_store(const GlobalOptions& g, const std::string& payload_path, const std::string& area,
              const std::string& patient, double severity, const std::string& store_dir,
              const std::string& keyfile) {
  const hcsim::ScenarioConfig cfg = load_config(g);
  std::ifstream in(payload_path, std::ios::binary);
  if (!in) throw hcsim::ConfigError("cannot open payload file: " + payload_path);
  std::vector<std::uint8_t> payload((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

  hcsim::StorageCluster storage = fs::exists(fs::path(store_dir) / "dht_manifest.json")
                                      ? hcsim::StorageCluster::load(store_dir)
                                      : hcsim::StorageCluster(cfg.storage_nodes);
  const auto key = store_key(cfg, keyfile);
  hcsim::crypto::DeterministicNonceSource nonces(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  hcsim::RecordContent content{severity, std::move(payload)};
  const auto sealed = hcsim::crypto::encrypt(content.to_bytes(), key, nonces);
  const hcsim::PatientAddress addr{area, patient};
  const hcsim::ContentHash hash = storage.store(hcsim::EHRRecord{addr, sealed.serialize(), true, 0});
  storage.save(store_dir);

  ordered_json j;
  j["address"] = addr.canonical();
  j["hash"] = hash.to_hex();
  j["node"] = storage.dht_lookup(addr)->node_id;
  std::cout << j.dump() << "\n";
  return kExitOk;
}

int cmd_fetch(const GlobalOptions& g, const std::string& area, const std::string& patient,
              const std::string& store_dir, const std::string& keyfile,
              const std::string& out_file) {
  const hcsim::ScenarioConfig cfg = load_config(g);
  const hcsim::StorageCluster storage = hcsim::StorageCluster::load(store_dir);
  const hcsim::PatientAddress addr{area, patient};
  const hcsim::FetchResult result = storage.fetch(addr);
  if (result.status == hcsim::FetchStatus::NotFound) {
    std::cerr << "not_found: no record for " << addr.canonical() << "\n";
    return 1;
  }
  if (result.status == hcsim::FetchStatus::IntegrityError) {
    std::cerr << "integrity_error: stored bytes for " << addr.canonical()
              << " do not match their content hash\n";
    return kExitIntegrity;
  }
  const auto key = store_key(cfg, keyfile);
  const auto content_bytes =
      hcsim::crypto::decrypt(hcsim::crypto::Ciphertext::deserialize(result.record.body), key);
  const hcsim::RecordContent content = hcsim::RecordContent::from_bytes(content_bytes);
  if (!out_file.empty()) {
    std::ofstream out(out_file, std::ios::binary);
    out.write(reinterpret_cast<const char*>(content.payload.data()),
              static_cast<std::streamsize>(content.payload.size()));
  }
  ordered_json j;
  j["address"] = addr.canonical();
  j["hash"] = result.hash.to_hex();
  j["node"] = result.node_id;
  j["severity_score"] = content.severity_score;
  j["payload_bytes"] = content.payload.size();
  std::cout << j.dump() << "\n";
  return kExitOk;
}

int cmd_inspect(const std::string& chain_path, const std::vector<std::string>& miners) {
  std::ifstream in(chain_path);
  if (!in) throw hcsim::ConfigError("cannot open chain file: " + chain_path);
  const hcsim::Ledger ledger = hcsim::Ledger::import_ndjson(in, miners);
  const hcsim::ChainVerdict verdict = ledger.verify_chain();
  std::size_t txs = 0;
  for (const auto& b : ledger.blocks()) txs += b.transactions.size();
  ordered_json j;
  j["blocks"] = ledger.blocks().size();
  j["transactions"] = txs;
  j["verify"] = verdict.ok ? "ok" : "corrupt";
  if (!verdict.ok) j["corrupt_height"] = verdict.corrupt_height;
  std::cout << j.dump() << "\n";
  return verdict.ok ? kExitOk : kExitIntegrity;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic edge-offloading and ledger-sharing simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "scenario config file");
  app.add_option("--out", g.out_dir, "output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed (overrides config)");

  auto* calibrate = app.add_subcommand("calibrate", "print the calibrated cost-model coefficients");

  std::string instance_path;
  bool exact = false;
  auto* offload = app.add_subcommand("offload", "run the offload experiment grid or solve an instance");
  offload->add_option("--instance", instance_path, "offloading instance file to solve");
  offload->add_flag("--exact", exact, "solve the instance by exhaustive search instead of PSO");

  auto* share = app.add_subcommand("share", "run the data-sharing experiment");
  auto* gas = app.add_subcommand("gas", "emit the contract gas receipt table");

  std::string requester = "doctor-0", keyfile, area = "area-1", patient = "patient-0",
              device = "dev-doctor-0";
  auto* request = app.add_subcommand("request", "run one EHR access request");
  request->add_option("--requester", requester, "scenario identity label to request as");
  request->add_option("--keyfile", keyfile, "hex file with a 32-byte signing seed");
  request->add_option("--area", area, "patient area id");
  request->add_option("--patient", patient, "patient id");
  request->add_option("--device", device, "device id presented with the request");

  std::string payload_path, store_dir = "store", out_file;
  double severity = 0.0;
  auto* store = app.add_subcommand("store", "encrypt and store a record");
  store->add_option("--payload", payload_path, "file with the record payload")->required();
  store->add_option("--area", area, "patient area id");
  store->add_option("--patient", patient, "patient id");
  store->add_option("--severity", severity, "severity score");
  store->add_option("--store-dir", store_dir, "storage directory");
  store->add_option("--keyfile", keyfile, "hex file with the record key");

  auto* fetch = app.add_subcommand("fetch", "fetch and verify a stored record");
  fetch->add_option("--area", area, "patient area id");
  fetch->add_option("--patient", patient, "patient id");
  fetch->add_option("--store-dir", store_dir, "storage directory");
  fetch->add_option("--keyfile", keyfile, "hex file with the record key");
  fetch->add_option("--out-file", out_file, "write the decrypted payload here");

  std::string chain_path;
  auto* inspect = app.add_subcommand("inspect", "verify an exported chain file");
  inspect->add_option("--chain", chain_path, "chain NDJSON file")->required();

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  try {
    if (calibrate->parsed()) return cmd_calibrate(g);
    if (offload->parsed()) return cmd_offload(g, instance_path, exact);
    if (share->parsed()) return cmd_share(g);
    if (gas->parsed()) return cmd_gas(g);
    if (request->parsed()) return cmd_request(g, requester, keyfile, area, patient, device);
    if (store->parsed()) return cmd_store(g, payload_path, area, patient, severity, store_dir, keyfile);
    if (fetch->parsed()) return cmd_fetch(g, area, patient, store_dir, keyfile, out_file);
    if (inspect->parsed()) {
      const hcsim::ScenarioConfig cfg = load_config(g);
      return cmd_inspect(chain_path, cfg.miners);
    }
  } catch (const hcsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hcsim::InfrastructureError& e) {
    std::cerr << "integrity violation: " << e.what() << "\n";
    return kExitIntegrity;
  } catch (const hcsim::crypto::AuthenticationError& e) {
    std::cerr << "integrity violation: " << e.what() << "\n";
    return kExitIntegrity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
