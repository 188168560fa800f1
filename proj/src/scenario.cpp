#include "hcsim/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "hcsim/config.hpp"
#include "json.hpp"

namespace hcsim {

namespace fs = std::filesystem;

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Local: return "local";
    case Scheme::Cloud: return "cloud";
    case Scheme::Edge: return "edge";
  }
  return "unknown";
}

std::optional<Scheme> scheme_from_string(const std::string& text) {
  if (text == "local") return Scheme::Local;
  if (text == "cloud") return Scheme::Cloud;
  if (text == "edge") return Scheme::Edge;
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string format_double_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

fs::path resolve(const fs::path& base_dir, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() ? p : base_dir / p;
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw ConfigError(what + " does not exist: " + p.string());
}

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::Time: return "time_s";
    case Metric::Energy: return "energy_mah";
    case Metric::Memory: return "memory_mb";
  }
  return "unknown";
}

}  // namespace

ScenarioConfig ScenarioConfig::load(const fs::path& path) {
  require_exists(path, "config file");
  const KvFile kv = KvFile::parse_file(path);
  const fs::path base = path.parent_path();

  ScenarioConfig cfg;
  cfg.seed = kv.require_u64("", "seed");
  cfg.out_dir = resolve(base, kv.get("", "out_dir").value_or("out"));

  for (const auto& s : kv.get_list("offload", "sizes_kb")) {
    cfg.sizes_kb.push_back(parse_double(s, "sizes_kb"));
  }
  if (cfg.sizes_kb.empty()) cfg.sizes_kb = {200, 400, 600, 800, 1000};
  const auto scheme_names = kv.get_list("offload", "schemes");
  if (scheme_names.empty()) {
    cfg.schemes = {Scheme::Local, Scheme::Cloud, Scheme::Edge};
  } else {
    for (const auto& name : scheme_names) {
      const auto s = scheme_from_string(name);
      if (!s) throw ConfigError("unknown scheme: " + name);
      cfg.schemes.push_back(*s);
    }
  }
  cfg.offload_anchors = resolve(base, kv.get("offload", "anchors").value_or("offload_anchors_v1.csv"));
  require_exists(cfg.offload_anchors, "offload anchor file");
  cfg.hardware.link_rate_bps =
      kv.get_double("offload", "link_rate_bits_per_sec", cfg.hardware.link_rate_bps);
  cfg.hardware.freq_local_hz = kv.get_double("offload", "freq_local_hz", cfg.hardware.freq_local_hz);
  cfg.hardware.freq_edge_hz = kv.get_double("offload", "freq_edge_hz", cfg.hardware.freq_edge_hz);
  cfg.hardware.enc_time_fraction =
      kv.get_double("offload", "enc_time_fraction", cfg.hardware.enc_time_fraction);
  cfg.hardware.power_trans_mah_per_s =
      kv.get_double("offload", "power_trans_mah_per_s", cfg.hardware.power_trans_mah_per_s);

  cfg.retrieval_anchors =
      resolve(base, kv.get("sharing", "retrieval_anchors").value_or("retrieval_anchors_v1.csv"));
  require_exists(cfg.retrieval_anchors, "retrieval anchor file");
  cfg.gas_schedule = resolve(base, kv.get("sharing", "gas_schedule").value_or("gas_schedule_v1.conf"));
  require_exists(cfg.gas_schedule, "gas schedule file");
  cfg.storage_nodes = kv.get_list("sharing", "storage_nodes");
  if (cfg.storage_nodes.empty()) cfg.storage_nodes = {"node-a", "node-b", "node-c", "node-d"};
  cfg.miners = kv.get_list("sharing", "miners");
  if (cfg.miners.empty()) cfg.miners = {"sealer-0", "sealer-1"};
  for (const auto& n : kv.get_list("sharing", "users_n")) {
    const auto value = parse_int(n, "users_n");
    if (value < 1) throw ConfigError("users_n entries must be >= 1");
    cfg.users_n.push_back(static_cast<int>(value));
  }
  if (cfg.users_n.empty()) cfg.users_n = {2, 4, 6, 8, 10, 12};
  cfg.patients = static_cast<int>(kv.get_int("sharing", "patients", cfg.patients));
  cfg.doctors = static_cast<int>(kv.get_int("sharing", "doctors", cfg.doctors));
  cfg.key_bits = static_cast<int>(kv.get_int("sharing", "key_bits", cfg.key_bits));
  if (cfg.patients < 1 || cfg.doctors < 1) throw ConfigError("need at least one patient and doctor");

  cfg.pso.swarm_size = static_cast<int>(kv.get_int("pso", "swarm_size", cfg.pso.swarm_size));
  cfg.pso.max_iterations = static_cast<int>(kv.get_int("pso", "max_iterations", cfg.pso.max_iterations));
  cfg.pso.inertia = kv.get_double("pso", "inertia", cfg.pso.inertia);
  cfg.pso.cognitive = kv.get_double("pso", "cognitive", cfg.pso.cognitive);
  cfg.pso.social = kv.get_double("pso", "social", cfg.pso.social);
  cfg.pso.v_max = kv.get_double("pso", "v_max", cfg.pso.v_max);
  cfg.pso.penalty_coefficient = kv.get_double("pso", "penalty", cfg.pso.penalty_coefficient);
  cfg.pso.rng_seed = cfg.seed;
  return cfg;
}

PiecewiseCurve::PiecewiseCurve(std::vector<std::pair<double, double>> points)
    : points_(std::move(points)) {
  if (points_.size() < 2) throw ConfigError("curve needs at least two anchor points");
  std::sort(points_.begin(), points_.end());
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i].first == points_[i - 1].first) throw ConfigError("duplicate curve anchor");
  }
}

double PiecewiseCurve::at(double x) const {
  for (const auto& [px, py] : points_) {
    if (px == x) return py;  // anchors reproduce exactly
  }
  std::size_t hi = 1;
  while (hi + 1 < points_.size() && points_[hi].first < x) ++hi;
  const auto& [x0, y0] = points_[hi - 1];
  const auto& [x1, y1] = points_[hi];
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

OffloadCalibration OffloadCalibration::load(const fs::path& anchors_csv, HardwareModel hw) {
  std::ifstream in(anchors_csv);
  if (!in) throw ConfigError("cannot open offload anchors: " + anchors_csv.string());
  std::vector<std::vector<std::pair<double, double>>> raw(9);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string scheme_text, size_text, time_text, energy_text, memory_text;
    if (!std::getline(ss, scheme_text, ',') || !std::getline(ss, size_text, ',') ||
        !std::getline(ss, time_text, ',') || !std::getline(ss, energy_text, ',') ||
        !std::getline(ss, memory_text)) {
      throw ConfigError("malformed offload anchor line: " + line);
    }
    if (scheme_text == "scheme") continue;  // header row
    const auto scheme = scheme_from_string(scheme_text);
    if (!scheme) throw ConfigError("unknown scheme in anchors: " + scheme_text);
    const double size = parse_double(size_text, "size_kb");
    const double values[3] = {parse_double(time_text, "time_s"),
                              parse_double(energy_text, "energy_mah"),
                              parse_double(memory_text, "memory_mb")};
    for (int m = 0; m < 3; ++m) {
      raw[static_cast<int>(*scheme) * 3 + m].emplace_back(size, values[m]);
    }
  }
  OffloadCalibration cal;
  cal.hw_ = hw;
  cal.curves_.reserve(9);
  for (auto& points : raw) {
    if (points.size() < 2) throw ConfigError("anchor file must cover all schemes and metrics");
    cal.curves_.emplace_back(std::move(points));
  }
  return cal;
}

const PiecewiseCurve& OffloadCalibration::curve(Scheme scheme, Metric metric) const {
  return curves_[static_cast<int>(scheme) * 3 + static_cast<int>(metric)];
}

CostTriple OffloadCalibration::curve_values(Scheme scheme, double size_kb) const {
  return CostTriple{curve(scheme, Metric::Time).at(size_kb),
                    curve(scheme, Metric::Energy).at(size_kb),
                    curve(scheme, Metric::Memory).at(size_kb)};
}

TaskProfile OffloadCalibration::profile(Scheme offload_variant, double size_kb) const {
  if (offload_variant == Scheme::Local) {
    throw std::invalid_argument("offload variant must be cloud or edge");
  }
  const double bits = size_kb * kBitsPerKb;
  const CostTriple local = curve_values(Scheme::Local, size_kb);
  const CostTriple remote = curve_values(offload_variant, size_kb);

  TaskProfile p;
  p.task_id = "cal-" + to_string(offload_variant) + "-" + format_double(size_kb) + "kb";
  p.size_bits = bits;
  p.freq_local = hw_.freq_local_hz;
  p.freq_edge = hw_.freq_edge_hz;
  p.rate_bits_per_sec = hw_.link_rate_bps;
  p.cpu_per_bit_local = local.time_s * hw_.freq_local_hz / bits;
  p.energy_local = local.energy_mah;
  p.mem_local = local.memory_mb;

  const double t_tx = bits / hw_.link_rate_bps;
  const double remainder = remote.time_s - t_tx;
  if (!(remainder > 0)) {
    throw ConfigError("anchor time at " + format_double(size_kb) +
                      " KB is below the transmission time; check the link rate");
  }
  const double t_enc = hw_.enc_time_fraction * remainder;
  const double t_edge = remainder - t_enc;
  p.cpu_per_bit_enc = t_enc * hw_.freq_local_hz / bits;
  p.cpu_per_bit_edge = t_edge * hw_.freq_edge_hz / bits;
  p.power_trans = hw_.power_trans_mah_per_s;
  const double e_tx = hw_.power_trans_mah_per_s * t_tx;
  if (!(remote.energy_mah > e_tx)) {
    throw ConfigError("anchor energy at " + format_double(size_kb) +
                      " KB is below the transmission energy; check power_trans");
  }
  p.power_enc = (remote.energy_mah - e_tx) / t_enc;
  p.mem_offload = remote.memory_mb;
  p.validate(hw_.link_rate_bps);
  return p;
}

CostTriple OffloadCalibration::scheme_costs(Scheme scheme, double size_kb) const {
  if (scheme == Scheme::Local) return blended_costs(profile(Scheme::Edge, size_kb), 0);
  return blended_costs(profile(scheme, size_kb), 1);
}

std::vector<double> OffloadCalibration::anchor_sizes_kb() const {
  std::vector<double> sizes;
  for (const auto& [x, y] : curve(Scheme::Local, Metric::Time).points()) sizes.push_back(x);
  return sizes;
}

void OffloadCalibration::print_audit(std::ostream& out) const {
  out << "calibration audit\n";
  out << "  hardware: link_rate_bps=" << format_double(hw_.link_rate_bps)
      << " freq_local_hz=" << format_double(hw_.freq_local_hz)
      << " freq_edge_hz=" << format_double(hw_.freq_edge_hz)
      << " enc_time_fraction=" << format_double(hw_.enc_time_fraction)
      << " power_trans=" << format_double(hw_.power_trans_mah_per_s) << "\n";
  for (Scheme scheme : {Scheme::Local, Scheme::Cloud, Scheme::Edge}) {
    for (Metric metric : {Metric::Time, Metric::Energy, Metric::Memory}) {
      const auto& points = curve(scheme, metric).points();
      out << "  curve scheme=" << to_string(scheme) << " metric=" << metric_name(metric) << ":";
      for (const auto& [x, y] : points) out << " " << format_double(x) << ":" << format_double(y);
      out << "\n";
      for (std::size_t i = 1; i < points.size(); ++i) {
        const double slope = (points[i].second - points[i - 1].second) /
                             (points[i].first - points[i - 1].first);
        const double intercept = points[i - 1].second - slope * points[i - 1].first;
        out << "    segment [" << format_double(points[i - 1].first) << ","
            << format_double(points[i].first) << "] fit: cost(kb) = "
            << format_double(intercept) << " + " << format_double(slope) << "*kb\n";
      }
    }
  }
  for (Scheme variant : {Scheme::Cloud, Scheme::Edge}) {
    for (double size : anchor_sizes_kb()) {
      const TaskProfile p = profile(variant, size);
      out << "  profile variant=" << to_string(variant) << " size_kb=" << format_double(size)
          << " cpu_per_bit_local=" << format_double_full(p.cpu_per_bit_local)
          << " cpu_per_bit_enc=" << format_double_full(p.cpu_per_bit_enc)
          << " cpu_per_bit_edge=" << format_double_full(p.cpu_per_bit_edge)
          << " power_enc=" << format_double_full(p.power_enc)
          << " mem_local=" << format_double(p.mem_local)
          << " mem_offload=" << format_double(p.mem_offload) << "\n";
    }
  }
}

MetricsReport run_offload_experiment(const ScenarioConfig& cfg,
                                     const OffloadCalibration& calibration, std::ostream& runlog) {
  MetricsReport report;
  runlog << "offload experiment seed=" << cfg.seed << "\n";
  for (Scheme scheme : cfg.schemes) {
    for (double size_kb : cfg.sizes_kb) {
      OffloadGridCell cell;
      cell.scheme = scheme;
      cell.size_kb = size_kb;
      cell.costs = calibration.scheme_costs(scheme, size_kb);
      report.offload_grid.push_back(cell);
      runlog << "cell scheme=" << to_string(scheme) << " size_kb=" << format_double(size_kb)
             << " time_s=" << format_double(cell.costs.time_s)
             << " energy_mah=" << format_double(cell.costs.energy_mah)
             << " memory_mb=" << format_double(cell.costs.memory_mb)
             << " exact=" << format_double_full(cell.costs.time_s) << "/"
             << format_double_full(cell.costs.energy_mah) << "/"
             << format_double_full(cell.costs.memory_mb) << "\n";
    }
  }
  return report;
}

SharingWorld::SharingWorld(const ScenarioConfig& cfg)
    : ledger(cfg.miners),
      schedule(GasSchedule::load(cfg.gas_schedule)),
      admin(crypto::KeyPair::derive(cfg.seed, "admin")),
      manager(crypto::KeyPair::derive(cfg.seed, "ehrs-manager")),
      contract(schedule, admin.public_key),
      storage(cfg.storage_nodes),
      record_key(crypto::KeyMaterial::derive(cfg.seed, "record-key", cfg.key_bits)),
      nonces(cfg.seed ^ 0x9e3779b97f4a7c15ull),
      system(ledger, contract, storage, admin, manager, &record_key) {}

std::unique_ptr<SharingWorld> SharingWorld::create(const ScenarioConfig& cfg,
                                                   std::ostream* runlog) {
  std::unique_ptr<SharingWorld> w(new SharingWorld(cfg));

  // Every end user holds a replicated chain view.
  w->ledger.register_participant("patient-0");

  w->system.register_user(w->admin, w->manager.public_key, Role::EhrsManager, {}, {});
  if (runlog) {
    *runlog << "register role=ehrs_manager pk=" << crypto::hex(w->manager.public_key) << "\n";
  }

  for (int i = 0; i < cfg.patients; ++i) {
    const std::string label = "patient-" + std::to_string(i);
    w->patients.push_back(crypto::KeyPair::derive(cfg.seed, label));
    const PatientAddress addr{"area-" + std::to_string(i % 2 + 1), label};
    w->patient_addresses.push_back(addr);
    w->system.register_user(w->admin, w->patients.back().public_key, Role::Patient, {},
                            {"dev-" + label}, addr);
    if (runlog) {
      *runlog << "register role=patient pk=" << crypto::hex(w->patients.back().public_key)
              << " address=" << addr.canonical() << "\n";
    }
  }
  for (int i = 0; i < cfg.doctors; ++i) {
    const std::string label = "doctor-" + std::to_string(i);
    w->doctors.push_back(crypto::KeyPair::derive(cfg.seed, label));
    // Only the first doctor holds a healthcare relation with patient 0.
    const std::vector<std::string> bindings =
        i == 0 ? std::vector<std::string>{w->patient_addresses[0].canonical()}
               : std::vector<std::string>{};
    w->system.register_user(w->admin, w->doctors.back().public_key, Role::Doctor, bindings,
                            {"dev-" + label});
    if (runlog) {
      *runlog << "register role=doctor pk=" << crypto::hex(w->doctors.back().public_key) << "\n";
    }
  }
  w->ledger.seal_block();

  // Analysed health results land in storage encrypted, one per patient.
  std::mt19937_64 rng(cfg.seed ^ 0xc2b2ae3d27d4eb4full);
  std::uniform_real_distribution<double> severity(0.0, 4.0);
  std::uniform_int_distribution<int> payload_len(256, 1024);
  const TaskProfile enc_profile =
      OffloadCalibration::load(cfg.offload_anchors, cfg.hardware).profile(Scheme::Edge, 200);
  for (int i = 0; i < cfg.patients; ++i) {
    RecordContent content;
    content.severity_score = severity(rng);
    content.payload.resize(payload_len(rng));
    for (auto& b : content.payload) b = static_cast<std::uint8_t>(rng());
    const crypto::Ciphertext sealed = crypto::encrypt(content.to_bytes(), w->record_key, w->nonces);
    EHRRecord record{w->patient_addresses[i], sealed.serialize(), true, w->ledger.now()};
    const ContentHash hash = w->storage.store(record);
    // The simulator charges the modeled encryption cost, not wall clock.
    const double modeled_enc_s =
        record.body.size() * 8.0 * enc_profile.cpu_per_bit_enc / enc_profile.freq_local;
    if (runlog) {
      *runlog << "store address=" << w->patient_addresses[i].canonical()
              << " hash=" << hash.to_hex()
              << " node=" << w->storage.dht_lookup(w->patient_addresses[i])->node_id
              << " bytes=" << record.body.size()
              << " severity=" << format_double(content.severity_score)
              << " modeled_enc_s=" << format_double(modeled_enc_s) << "\n";
    }
  }
  w->ledger.seal_block();
  return w;
}

MetricsReport run_sharing_experiment(const ScenarioConfig& cfg, const fs::path& out_dir,
                                     std::ostream& runlog, bool persist_artifacts) {
  MetricsReport report;
  runlog << "sharing experiment seed=" << cfg.seed << "\n";

  const std::unique_ptr<SharingWorld> w = SharingWorld::create(cfg, &runlog);

  // Authorized and unauthorized access scripts.
  auto run_request = [&](const std::string& label, const std::string& identity,
                         const crypto::KeyPair& requester, const PatientAddress& addr,
                         const std::string& device) {
    AccessRequest req{requester.public_key, addr, device, w->ledger.now()};
    OutcomeRecord rec;
    rec.label = label;
    rec.requester = identity;
    rec.outcome = w->system.process_request(req, requester);
    runlog << "request label=" << label << " requester=" << identity
           << " address=" << addr.canonical() << " device=" << device
           << " verdict=" << (rec.outcome.verdict == Verdict::Granted ? "granted" : "penalized")
           << " tx=" << crypto::hex(rec.outcome.tx_id) << "\n";
    report.outcomes.push_back(std::move(rec));
  };
  run_request("authorized-doctor", "doctor-0", w->doctors[0], w->patient_addresses[0],
              "dev-doctor-0");
  const crypto::KeyPair intruder = crypto::KeyPair::derive(cfg.seed, "intruder");
  run_request("unregistered-intruder", "intruder", intruder, w->patient_addresses[0],
              "dev-intruder");
  if (cfg.doctors > 1) {
    run_request("unbound-doctor", "doctor-1", w->doctors[1], w->patient_addresses[0],
                "dev-doctor-1");
  }
  w->ledger.seal_block();

  // Canonical five-function gas session in the published row order: a new
  // user joins, one leaves, a policy query runs, then the authorized and
  // unauthorized requests above supply the retrieval and penalty charges.
  const crypto::KeyPair joining = crypto::KeyPair::derive(cfg.seed, "joining-user");
  const auto added = w->contract.add_user(w->admin.public_key, joining.public_key, Role::Doctor);
  const auto deleted = w->contract.delete_user(w->admin.public_key, joining.public_key);
  const auto queried = w->contract.policy_list(w->admin.public_key, w->doctors[0].public_key);
  report.gas_rows = {added.receipt, deleted.receipt, queried.receipt,
                     report.outcomes[0].outcome.gas, report.outcomes[1].outcome.gas};
  report.gas_rows.push_back(total_receipt(w->schedule, report.gas_rows));
  for (const auto& row : report.gas_rows) {
    runlog << "gas function=" << row.function_label << " gas=" << row.gas_used
           << " ether=" << row.ether_display << " usd=" << row.usd_display << "\n";
  }

  // Retrieval-latency table.
  const RetrievalLatencyModel latency = RetrievalLatencyModel::load(cfg.retrieval_anchors);
  for (int n : cfg.users_n) {
    LatencyRow row;
    row.n_users = n;
    row.centralized_s = latency.latency_seconds(n, RetrievalMode::Centralized);
    row.distributed_s = latency.latency_seconds(n, RetrievalMode::Distributed);
    row.savings = (row.centralized_s - row.distributed_s) / row.centralized_s;
    report.latency_rows.push_back(row);
    runlog << "latency n=" << n << " centralized_s=" << format_double(row.centralized_s)
           << " distributed_s=" << format_double(row.distributed_s)
           << " savings=" << format_double(row.savings) << "\n";
  }

  report.sealed_blocks = w->ledger.blocks().size();
  for (const Block& b : w->ledger.blocks()) report.chain_transactions += b.transactions.size();
  runlog << "chain blocks=" << report.sealed_blocks
         << " transactions=" << report.chain_transactions
         << " verify=" << (w->ledger.verify_chain().ok ? "ok" : "corrupt") << "\n";

  if (persist_artifacts) {
    fs::create_directories(out_dir);
    std::ofstream chain_out(out_dir / "chain.ndjson");
    w->ledger.export_ndjson(chain_out);
    w->storage.save(out_dir / "storage");
  }
  return report;
}

namespace {

void emit_offload_csv(const MetricsReport& report, const fs::path& out_dir,
                      std::vector<fs::path>& written) {
  const fs::path grid_path = out_dir / "offload_grid.csv";
  std::ofstream grid(grid_path);
  grid << "# schema: offload_grid v1\n";
  grid << "scheme,size_kb,time_s,energy_mah,memory_mb\n";
  for (const auto& cell : report.offload_grid) {
    grid << to_string(cell.scheme) << "," << format_double(cell.size_kb) << ","
         << format_double(cell.costs.time_s) << "," << format_double(cell.costs.energy_mah) << ","
         << format_double(cell.costs.memory_mb) << "\n";
  }
  written.push_back(grid_path);

  // Savings need all three schemes at matching sizes.
  auto find_cell = [&](Scheme s, double size) -> const OffloadGridCell* {
    for (const auto& cell : report.offload_grid) {
      if (cell.scheme == s && cell.size_kb == size) return &cell;
    }
    return nullptr;
  };
  std::vector<double> sizes;
  for (const auto& cell : report.offload_grid) {
    if (std::find(sizes.begin(), sizes.end(), cell.size_kb) == sizes.end()) {
      sizes.push_back(cell.size_kb);
    }
  }
  std::sort(sizes.begin(), sizes.end());
  const fs::path savings_path = out_dir / "offload_savings.csv";
  std::ofstream savings(savings_path);
  savings << "# schema: offload_savings v1\n";
  savings << "size_kb,metric,local,cloud,edge,edge_vs_local_pct,edge_vs_cloud_pct\n";
  for (double size : sizes) {
    const auto* local = find_cell(Scheme::Local, size);
    const auto* cloud = find_cell(Scheme::Cloud, size);
    const auto* edge = find_cell(Scheme::Edge, size);
    if (!local || !cloud || !edge) continue;
    const double locals[3] = {local->costs.time_s, local->costs.energy_mah, local->costs.memory_mb};
    const double clouds[3] = {cloud->costs.time_s, cloud->costs.energy_mah, cloud->costs.memory_mb};
    const double edges[3] = {edge->costs.time_s, edge->costs.energy_mah, edge->costs.memory_mb};
    const char* metrics[3] = {"time_s", "energy_mah", "memory_mb"};
    for (int m = 0; m < 3; ++m) {
      savings << format_double(size) << "," << metrics[m] << "," << format_double(locals[m]) << ","
              << format_double(clouds[m]) << "," << format_double(edges[m]) << ","
              << format_double((locals[m] - edges[m]) / locals[m] * 100.0) << ","
              << format_double((clouds[m] - edges[m]) / clouds[m] * 100.0) << "\n";
    }
  }
  written.push_back(savings_path);
}

void emit_offload_plots(const MetricsReport& report, const fs::path& out_dir,
                        std::vector<fs::path>& written) {
  const struct {
    Metric metric;
    const char* file;
    const char* title;
    const char* ylabel;
  } plots[3] = {
      {Metric::Time, "offload_time.plot", "Processing time by file size", "time_s"},
      {Metric::Energy, "offload_energy.plot", "Battery consumption by file size", "energy_mah"},
      {Metric::Memory, "offload_memory.plot", "Memory usage by file size", "memory_mb"},
  };
  for (const auto& plot : plots) {
    const fs::path path = out_dir / plot.file;
    std::ofstream out(path);
    out << "# plotspec v1\n";
    out << "title " << plot.title << "\n";
    out << "xlabel size_kb\n";
    out << "ylabel " << plot.ylabel << "\n";
    for (Scheme scheme : {Scheme::Local, Scheme::Cloud, Scheme::Edge}) {
      bool any = false;
      std::ostringstream series;
      series << "series " << to_string(scheme);
      for (const auto& cell : report.offload_grid) {
        if (cell.scheme != scheme) continue;
        const double v = plot.metric == Metric::Time     ? cell.costs.time_s
                         : plot.metric == Metric::Energy ? cell.costs.energy_mah
                                                         : cell.costs.memory_mb;
        series << " " << format_double(cell.size_kb) << ":" << format_double(v);
        any = true;
      }
      if (any) out << series.str() << "\n";
    }
    written.push_back(path);
  }
}

void emit_latency(const MetricsReport& report, const fs::path& out_dir, ReportFormat format,
                  std::vector<fs::path>& written) {
  if (format == ReportFormat::Csv) {
    const fs::path path = out_dir / "retrieval_latency.csv";
    std::ofstream out(path);
    out << "# schema: retrieval_latency v1\n";
    out << "n_users,centralized_s,distributed_s,savings\n";
    for (const auto& row : report.latency_rows) {
      out << row.n_users << "," << format_double(row.centralized_s) << ","
          << format_double(row.distributed_s) << "," << format_double(row.savings) << "\n";
    }
    written.push_back(path);
    return;
  }
  const fs::path path = out_dir / "retrieval_latency.plot";
  std::ofstream out(path);
  out << "# plotspec v1\n";
  out << "title Data retrieval latency by concurrent users\n";
  out << "xlabel n_users\nylabel latency_s\n";
  std::ostringstream cent, dist;
  cent << "series centralized";
  dist << "series distributed";
  for (const auto& row : report.latency_rows) {
    cent << " " << row.n_users << ":" << format_double(row.centralized_s);
    dist << " " << row.n_users << ":" << format_double(row.distributed_s);
  }
  out << cent.str() << "\n" << dist.str() << "\n";
  written.push_back(path);
}

void emit_gas(const MetricsReport& report, const fs::path& out_dir, std::vector<fs::path>& written) {
  const fs::path path = out_dir / "gas_receipts.csv";
  std::ofstream out(path);
  out << "# schema: gas_receipts v1\n";
  out << "function,gas_used,ether,usd\n";
  for (const auto& row : report.gas_rows) {
    out << row.function_label << "," << row.gas_used << "," << row.ether_display << ","
        << row.usd_display << "\n";
  }
  written.push_back(path);
}

void emit_outcomes(const MetricsReport& report, const fs::path& out_dir,
                   std::vector<fs::path>& written) {
  using json = nlohmann::ordered_json;
  json arr = json::array();
  for (const auto& rec : report.outcomes) {
    json j;
    j["label"] = rec.label;
    j["requester"] = rec.requester;
    j["verdict"] = rec.outcome.verdict == Verdict::Granted ? "granted" : "penalized";
    j["message"] = rec.outcome.message;
    j["tx_id"] = crypto::hex(rec.outcome.tx_id);
    if (rec.outcome.record_hash) j["record_hash"] = rec.outcome.record_hash->to_hex();
    if (rec.outcome.severity_score) j["severity_score"] = *rec.outcome.severity_score;
    json gas;
    gas["function"] = rec.outcome.gas.function_label;
    gas["gas_used"] = rec.outcome.gas.gas_used;
    gas["ether"] = rec.outcome.gas.ether_display;
    gas["usd"] = rec.outcome.gas.usd_display;
    j["gas"] = gas;
    arr.push_back(std::move(j));
  }
  const fs::path path = out_dir / "outcomes.json";
  std::ofstream out(path);
  out << arr.dump(2) << "\n";
  written.push_back(path);
}

}  // namespace

std::vector<fs::path> emit_report(const MetricsReport& report, const fs::path& out_dir,
                                  ReportFormat format) {
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  if (!report.offload_grid.empty()) {
    if (format == ReportFormat::Csv) {
      emit_offload_csv(report, out_dir, written);
    } else {
      emit_offload_plots(report, out_dir, written);
    }
  }
  if (!report.latency_rows.empty()) emit_latency(report, out_dir, format, written);
  if (format == ReportFormat::Csv && !report.gas_rows.empty()) emit_gas(report, out_dir, written);
  if (format == ReportFormat::Csv && !report.outcomes.empty()) {
    emit_outcomes(report, out_dir, written);
  }
  return written;
}

void run_full_scenario(const ScenarioConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const OffloadCalibration calibration = OffloadCalibration::load(cfg.offload_anchors, cfg.hardware);
  {
    std::ofstream runlog(out_dir / "offload_run.log");
    calibration.print_audit(runlog);
    const MetricsReport report = run_offload_experiment(cfg, calibration, runlog);
    emit_report(report, out_dir, ReportFormat::Csv);
    emit_report(report, out_dir, ReportFormat::Plotfile);
  }
  {
    std::ofstream runlog(out_dir / "sharing_run.log");
    const MetricsReport report = run_sharing_experiment(cfg, out_dir, runlog);
    emit_report(report, out_dir, ReportFormat::Csv);
    emit_report(report, out_dir, ReportFormat::Plotfile);
  }
}

InstanceFile InstanceFile::load(const fs::path& path) {
  require_exists(path, "instance file");
  const KvFile kv = KvFile::parse_file(path);
  InstanceFile inst;
  inst.bounds.tau = kv.require_double("bounds", "tau");
  inst.bounds.zeta = kv.require_double("bounds", "zeta");
  inst.weights.alpha_t = kv.get_double("weights", "alpha_t", inst.weights.alpha_t);
  inst.weights.alpha_e = kv.get_double("weights", "alpha_e", inst.weights.alpha_e);
  inst.weights.alpha_m = kv.get_double("weights", "alpha_m", inst.weights.alpha_m);
  const double link_cap = kv.get_double("", "link_cap_bits_per_sec", kDefaultLinkCapBps);
  for (std::size_t occurrence : kv.section_occurrences("task")) {
    TaskProfile p;
    p.task_id = kv.get_at(occurrence, "id").value_or("task-" + std::to_string(occurrence));
    p.size_bits = kv.require_double_at(occurrence, "size_bits");
    p.cpu_per_bit_local = kv.require_double_at(occurrence, "cpu_per_bit_local");
    p.cpu_per_bit_enc = kv.require_double_at(occurrence, "cpu_per_bit_enc");
    p.cpu_per_bit_edge = kv.require_double_at(occurrence, "cpu_per_bit_edge");
    p.freq_local = kv.require_double_at(occurrence, "freq_local");
    p.freq_edge = kv.require_double_at(occurrence, "freq_edge");
    p.rate_bits_per_sec = kv.require_double_at(occurrence, "rate_bits_per_sec");
    p.energy_local = kv.require_double_at(occurrence, "energy_local");
    p.mem_local = kv.require_double_at(occurrence, "mem_local");
    p.power_enc = kv.require_double_at(occurrence, "power_enc");
    p.power_trans = kv.require_double_at(occurrence, "power_trans");
    p.mem_offload = kv.require_double_at(occurrence, "mem_offload");
    try {
      p.validate(link_cap);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid task profile: ") + e.what());
    }
    inst.tasks.push_back(std::move(p));
  }
  if (inst.tasks.empty()) throw ConfigError("instance file lists no tasks");
  inst.weights.validate();
  inst.bounds.validate();
  return inst;
}

}  // namespace hcsim
