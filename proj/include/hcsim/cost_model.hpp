#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hcsim {

// Canonical internal units: bits, seconds, CPU cycles, mAh, MB.
// KB appears only at I/O boundaries (1 KB = 8000 bits).
inline constexpr double kBitsPerKb = 8000.0;
// Uplink cap, 11 Mbit/s.
inline constexpr double kDefaultLinkCapBps = 11e6;

// Per-task measurements and device/edge coefficients.
struct TaskProfile {
  std::string task_id;
  double size_bits = 0;           // D_n
  double cpu_per_bit_local = 0;   // device cycles per bit
  double cpu_per_bit_enc = 0;     // device cycles per bit spent encrypting
  double cpu_per_bit_edge = 0;    // edge cycles per bit
  double freq_local = 0;          // device cycles per second
  double freq_edge = 0;           // edge cycles per second
  double rate_bits_per_sec = 0;   // uplink rate
  double energy_local = 0;        // mAh for full local execution
  double mem_local = 0;           // MB for local execution
  double power_enc = 0;           // mAh per second while encrypting
  double power_trans = 0;         // mAh per second while transmitting
  double mem_offload = 0;         // MB used by encryption when offloading

  // Throws std::invalid_argument unless every field is strictly positive
  // and the uplink rate respects the link cap.
  void validate(double link_cap_bps = kDefaultLinkCapBps) const;
};

struct CostWeights {
  double alpha_t = 1.0 / 3.0;
  double alpha_e = 1.0 / 3.0;
  double alpha_m = 1.0 / 3.0;
  void validate() const;  // each weight in [0,1]
};

struct ConstraintBounds {
  double tau = 0;   // max total execution time, seconds
  double zeta = 0;  // max total memory, MB
  void validate() const;
};

struct OffloadTimeTerms {
  double encryption_s = 0;
  double edge_exec_s = 0;
  double transmission_s = 0;
  double total() const { return encryption_s + edge_exec_s + transmission_s; }
};

struct OffloadEnergyTerms {
  double encryption_mah = 0;
  double transmission_mah = 0;
  double total() const { return encryption_mah + transmission_mah; }
};

struct CostTriple {
  double time_s = 0;
  double energy_mah = 0;
  double memory_mb = 0;
};

double local_time(const TaskProfile& p);
OffloadTimeTerms offload_time_terms(const TaskProfile& p);
double offload_time(const TaskProfile& p);
OffloadEnergyTerms offload_energy_terms(const TaskProfile& p);
double offload_energy(const TaskProfile& p);

// x_n = 0 -> local triple, x_n = 1 -> offload triple.
CostTriple blended_costs(const TaskProfile& p, int x_n);

// Weighted sum over tasks, accumulated in task-index order for determinism.
double objective(std::span<const TaskProfile> tasks, std::span<const std::uint8_t> x,
                 const CostWeights& w);

struct ConstraintReport {
  struct Entry {
    bool satisfied = false;
    double lhs = 0;
    double rhs = 0;
    double slack() const { return rhs - lhs; }
    double violation() const { return lhs > rhs ? lhs - rhs : 0.0; }
  };
  Entry c1_offload_time_tradeoff;   // sum x*T_off <= sum (1-x)*T_local
  Entry c2_offload_energy_tradeoff; // sum x*E_off <= sum (1-x)*E_local
  Entry c3_latency_budget;          // total blended time <= tau
  Entry c4_memory_budget;           // total blended memory <= zeta

  bool all_satisfied() const;
  double total_violation() const;
};

// Infeasibility is a report, never an error; ties on the bound count as
// satisfied.
ConstraintReport check_constraints(std::span<const TaskProfile> tasks,
                                   std::span<const std::uint8_t> x,
                                   const ConstraintBounds& bounds);

struct CostBreakdown {
  std::vector<CostTriple> per_task;
  CostTriple totals;  // summed in task-index order
  double objective_value = 0;
};

CostBreakdown cost_breakdown(std::span<const TaskProfile> tasks, std::span<const std::uint8_t> x,
                             const CostWeights& w);

}  // namespace hcsim
