#include "hcsim/cost_model.hpp"

#include <stdexcept>

namespace hcsim {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0)) {
    throw std::invalid_argument(std::string("TaskProfile field must be strictly positive: ") + name);
  }
}

void require_bit(int x) {
  if (x != 0 && x != 1) throw std::invalid_argument("offloading decision must be 0 or 1");
}

void require_same_length(std::size_t tasks, std::size_t x) {
  if (tasks != x) {
    throw std::invalid_argument("decision vector length " + std::to_string(x) +
                                " does not match task count " + std::to_string(tasks));
  }
}

}  // namespace

void TaskProfile::validate(double link_cap_bps) const {
  require_positive(size_bits, "size_bits");
  require_positive(cpu_per_bit_local, "cpu_per_bit_local");
  require_positive(cpu_per_bit_enc, "cpu_per_bit_enc");
  require_positive(cpu_per_bit_edge, "cpu_per_bit_edge");
  require_positive(freq_local, "freq_local");
  require_positive(freq_edge, "freq_edge");
  require_positive(rate_bits_per_sec, "rate_bits_per_sec");
  require_positive(energy_local, "energy_local");
  require_positive(mem_local, "mem_local");
  require_positive(power_enc, "power_enc");
  require_positive(power_trans, "power_trans");
  require_positive(mem_offload, "mem_offload");
  if (rate_bits_per_sec > link_cap_bps) {
    throw std::invalid_argument("rate_bits_per_sec exceeds the link cap for task '" + task_id + "'");
  }
}

void CostWeights::validate() const {
  for (double w : {alpha_t, alpha_e, alpha_m}) {
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("cost weights must lie in [0,1]");
  }
}

void ConstraintBounds::validate() const {
  if (!(tau > 0)) throw std::invalid_argument("tau must be strictly positive");
  if (!(zeta > 0)) throw std::invalid_argument("zeta must be strictly positive");
}

double local_time(const TaskProfile& p) {
  return p.size_bits * p.cpu_per_bit_local / p.freq_local;
}

OffloadTimeTerms offload_time_terms(const TaskProfile& p) {
  OffloadTimeTerms t;
  t.encryption_s = p.size_bits * p.cpu_per_bit_enc / p.freq_local;
  t.edge_exec_s = p.size_bits * p.cpu_per_bit_edge / p.freq_edge;
  t.transmission_s = p.size_bits / p.rate_bits_per_sec;
  return t;
}

double offload_time(const TaskProfile& p) { return offload_time_terms(p).total(); }

OffloadEnergyTerms offload_energy_terms(const TaskProfile& p) {
  const OffloadTimeTerms t = offload_time_terms(p);
  OffloadEnergyTerms e;
  e.encryption_mah = p.power_enc * t.encryption_s;
  e.transmission_mah = p.power_trans * t.transmission_s;
  return e;
}

double offload_energy(const TaskProfile& p) { return offload_energy_terms(p).total(); }

CostTriple blended_costs(const TaskProfile& p, int x_n) {
  require_bit(x_n);
  if (x_n == 0) {
    return CostTriple{local_time(p), p.energy_local, p.mem_local};
  }
  return CostTriple{offload_time(p), offload_energy(p), p.mem_offload};
}

double objective(std::span<const TaskProfile> tasks, std::span<const std::uint8_t> x,
                 const CostWeights& w) {
  require_same_length(tasks.size(), x.size());
  double sum = 0.0;
  for (std::size_t n = 0; n < tasks.size(); ++n) {
    const CostTriple c = blended_costs(tasks[n], x[n]);
    sum += w.alpha_t * c.time_s + w.alpha_e * c.energy_mah + w.alpha_m * c.memory_mb;
  }
  return sum;
}

bool ConstraintReport::all_satisfied() const {
  return c1_offload_time_tradeoff.satisfied && c2_offload_energy_tradeoff.satisfied &&
         c3_latency_budget.satisfied && c4_memory_budget.satisfied;
}

double ConstraintReport::total_violation() const {
  return c1_offload_time_tradeoff.violation() + c2_offload_energy_tradeoff.violation() +
         c3_latency_budget.violation() + c4_memory_budget.violation();
}

ConstraintReport check_constraints(std::span<const TaskProfile> tasks,
                                   std::span<const std::uint8_t> x,
                                   const ConstraintBounds& bounds) {
  require_same_length(tasks.size(), x.size());
  ConstraintReport r;
  double offload_t = 0, local_t = 0;
  double offload_e = 0, local_e = 0;
  double total_mem = 0;
  for (std::size_t n = 0; n < tasks.size(); ++n) {
    const TaskProfile& p = tasks[n];
    if (x[n] == 1) {
      offload_t += offload_time(p);
      offload_e += offload_energy(p);
      total_mem += p.mem_offload;
    } else {
      local_t += local_time(p);
      local_e += p.energy_local;
      total_mem += p.mem_local;
    }
  }
  auto fill = [](ConstraintReport::Entry& e, double lhs, double rhs) {
    e.lhs = lhs;
    e.rhs = rhs;
    e.satisfied = lhs <= rhs;
  };
  fill(r.c1_offload_time_tradeoff, offload_t, local_t);
  fill(r.c2_offload_energy_tradeoff, offload_e, local_e);
  fill(r.c3_latency_budget, offload_t + local_t, bounds.tau);
  fill(r.c4_memory_budget, total_mem, bounds.zeta);
  return r;
}

CostBreakdown cost_breakdown(std::span<const TaskProfile> tasks, std::span<const std::uint8_t> x,
                             const CostWeights& w) {
  require_same_length(tasks.size(), x.size());
  CostBreakdown out;
  out.per_task.reserve(tasks.size());
  for (std::size_t n = 0; n < tasks.size(); ++n) {
    const CostTriple c = blended_costs(tasks[n], x[n]);
    out.per_task.push_back(c);
    out.totals.time_s += c.time_s;
    out.totals.energy_mah += c.energy_mah;
    out.totals.memory_mb += c.memory_mb;
    out.objective_value += w.alpha_t * c.time_s + w.alpha_e * c.energy_mah + w.alpha_m * c.memory_mb;
  }
  return out;
}

}  // namespace hcsim
