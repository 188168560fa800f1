#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "hcsim/cost_model.hpp"
#include "hcsim/scenario.hpp"

using namespace hcsim;

namespace {

// Plain profile with easy hand arithmetic.
TaskProfile simple_profile() {
  TaskProfile p;
  p.task_id = "t";
  p.size_bits = 1000;
  p.cpu_per_bit_local = 2;
  p.freq_local = 10;
  p.cpu_per_bit_enc = 1;
  p.cpu_per_bit_edge = 2;
  p.freq_edge = 100;
  p.rate_bits_per_sec = 500;
  p.energy_local = 3;
  p.mem_local = 32;
  p.power_enc = 0.5;
  p.power_trans = 1.0;
  p.mem_offload = 27;
  return p;
}

TaskProfile random_profile(std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TaskProfile p;
  p.task_id = "r" + std::to_string(index);
  p.size_bits = 0.5e6 + u(rng) * 9.5e6;
  p.cpu_per_bit_local = 1000 + u(rng) * 3000;
  p.cpu_per_bit_enc = 100 + u(rng) * 700;
  p.cpu_per_bit_edge = 500 + u(rng) * 2000;
  p.freq_local = 2.8e9;
  p.freq_edge = 2.5e9;
  p.rate_bits_per_sec = 2e6 + u(rng) * 9e6;
  p.energy_local = 1 + u(rng) * 11;
  p.mem_local = 20 + u(rng) * 80;
  p.power_enc = 1 + u(rng) * 5;
  p.power_trans = 0.5 + u(rng) * 1.5;
  p.mem_offload = 10 + u(rng) * 80;
  return p;
}

OffloadCalibration calibration() {
  return OffloadCalibration::load(std::filesystem::path(HCSIM_DATA_DIR) / "offload_anchors_v1.csv",
                                  HardwareModel{});
}

}  // namespace

TEST_CASE("local_time direct substitution") {
  TaskProfile p = simple_profile();
  p.freq_local = 4;
  CHECK(local_time(p) == 500.0);  // 1000*2/4
}

TEST_CASE("profile invariants reject nonpositive fields and rate above cap") {
  TaskProfile p = simple_profile();
  p.validate(kDefaultLinkCapBps);
  p.size_bits = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = simple_profile();
  p.rate_bits_per_sec = kDefaultLinkCapBps + 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  // Minimum positive size still yields positive time.
  p = simple_profile();
  p.size_bits = 1e-9;
  CHECK(local_time(p) > 0.0);
}

TEST_CASE("offload_time terms and sum: 100 + 20 + 2 = 122") {
  const TaskProfile p = simple_profile();
  const OffloadTimeTerms t = offload_time_terms(p);
  CHECK(t.encryption_s == 100.0);    // 1000*1/10
  CHECK(t.edge_exec_s == 20.0);      // 1000*2/100
  CHECK(t.transmission_s == 2.0);    // 1000/500
  CHECK(offload_time(p) == 122.0);
  CHECK(offload_time(p) == t.encryption_s + t.edge_exec_s + t.transmission_s);
}

TEST_CASE("offload_energy terms") {
  TaskProfile p = simple_profile();
  const OffloadEnergyTerms e = offload_energy_terms(p);
  CHECK(e.encryption_mah == doctest::Approx(0.5 * 100.0));
  CHECK(e.transmission_mah == doctest::Approx(2.0));
  CHECK(offload_energy(p) == doctest::Approx(52.0));
  // Zero rates are excluded by the invariant, so check the limit with tiny
  // rates instead of zero.
  p.power_enc = 1e-300;
  p.power_trans = 1e-300;
  CHECK(offload_energy(p) == doctest::Approx(0.0));
}

TEST_CASE("blended_costs selects the right triple") {
  const TaskProfile p = simple_profile();
  const CostTriple local = blended_costs(p, 0);
  CHECK(local.time_s == local_time(p));
  CHECK(local.energy_mah == p.energy_local);
  CHECK(local.memory_mb == p.mem_local);
  const CostTriple off = blended_costs(p, 1);
  CHECK(off.time_s == offload_time(p));
  CHECK(off.energy_mah == offload_energy(p));
  CHECK(off.memory_mb == p.mem_offload);
  CHECK_THROWS_AS(blended_costs(p, 2), std::invalid_argument);
}

TEST_CASE("calibrated 200 KB memory: 32 MB local, 27 MB offloaded") {
  const TaskProfile p = calibration().profile(Scheme::Edge, 200);
  CHECK(blended_costs(p, 0).memory_mb == 32.0);
  CHECK(blended_costs(p, 1).memory_mb == 27.0);
}

TEST_CASE("calibrated profiles reproduce published end-to-end costs") {
  const OffloadCalibration cal = calibration();
  CHECK(local_time(cal.profile(Scheme::Edge, 200)) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(offload_time(cal.profile(Scheme::Edge, 200)) == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(offload_time(cal.profile(Scheme::Edge, 1000)) == doctest::Approx(3.6).epsilon(1e-12));
  CHECK(offload_energy(cal.profile(Scheme::Edge, 200)) == doctest::Approx(2.1).epsilon(1e-12));
}

TEST_CASE("objective: decomposition, projection, dimension error") {
  std::mt19937_64 rng(5);
  std::vector<TaskProfile> tasks;
  for (int i = 0; i < 5; ++i) tasks.push_back(random_profile(rng, i));
  const CostWeights thirds;

  // all-local objective equals (1/3) * sum of local triples.
  std::vector<std::uint8_t> zeros(tasks.size(), 0);
  double sum = 0;
  for (const auto& t : tasks) sum += local_time(t) + t.energy_local + t.mem_local;
  CHECK(objective(tasks, zeros, thirds) == doctest::Approx(sum / 3.0).epsilon(1e-12));

  // single task, alpha=(1,0,0), x=1 -> offload time of that task.
  const std::vector<TaskProfile> one{tasks[0]};
  const std::vector<std::uint8_t> x1{1};
  CHECK(objective(one, x1, CostWeights{1, 0, 0}) == doctest::Approx(offload_time(tasks[0])));

  std::vector<std::uint8_t> short_x(tasks.size() - 1, 0);
  CHECK_THROWS_AS(objective(tasks, short_x, thirds), std::invalid_argument);
}

TEST_CASE("objective matches an independent term-by-term recomputation") {
  std::mt19937_64 rng(17);
  std::vector<TaskProfile> tasks;
  for (int i = 0; i < 5; ++i) tasks.push_back(random_profile(rng, i));
  const CostWeights w{0.5, 0.3, 0.2};
  std::vector<std::uint8_t> x{1, 0, 1, 1, 0};

  // Oracle: recompute each term straight from the formulas, not via
  // blended_costs.
  double expected = 0;
  for (std::size_t n = 0; n < tasks.size(); ++n) {
    const TaskProfile& p = tasks[n];
    double t, e, m;
    if (x[n]) {
      t = p.size_bits * p.cpu_per_bit_enc / p.freq_local +
          p.size_bits * p.cpu_per_bit_edge / p.freq_edge + p.size_bits / p.rate_bits_per_sec;
      e = p.power_enc * (p.size_bits * p.cpu_per_bit_enc / p.freq_local) +
          p.power_trans * (p.size_bits / p.rate_bits_per_sec);
      m = p.mem_offload;
    } else {
      t = p.size_bits * p.cpu_per_bit_local / p.freq_local;
      e = p.energy_local;
      m = p.mem_local;
    }
    expected += w.alpha_t * t + w.alpha_e * e + w.alpha_m * m;
  }
  CHECK(objective(tasks, x, w) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("objective is linear in each weight") {
  std::mt19937_64 rng(23);
  std::vector<TaskProfile> tasks;
  for (int i = 0; i < 6; ++i) tasks.push_back(random_profile(rng, i));
  std::vector<std::uint8_t> x{0, 1, 0, 1, 1, 0};
  const CostWeights base{0.2, 0.3, 0.4};
  const double delta = 0.17;
  const CostWeights bumped{base.alpha_t + delta, base.alpha_e, base.alpha_m};
  double total_time = 0;
  for (std::size_t n = 0; n < tasks.size(); ++n) {
    total_time += x[n] ? offload_time(tasks[n]) : local_time(tasks[n]);
  }
  CHECK(objective(tasks, x, bumped) - objective(tasks, x, base) ==
        doctest::Approx(delta * total_time).epsilon(1e-12));
}

TEST_CASE("check_constraints: trivial cases") {
  std::mt19937_64 rng(31);
  std::vector<TaskProfile> tasks;
  for (int i = 0; i < 4; ++i) tasks.push_back(random_profile(rng, i));
  std::vector<std::uint8_t> zeros(tasks.size(), 0);

  // All local: C1/C2 left sides are zero.
  ConstraintReport r = check_constraints(tasks, zeros, ConstraintBounds{1e18, 1e18});
  CHECK(r.c1_offload_time_tradeoff.satisfied);
  CHECK(r.c1_offload_time_tradeoff.lhs == 0.0);
  CHECK(r.c2_offload_energy_tradeoff.satisfied);
  CHECK(r.c2_offload_energy_tradeoff.lhs == 0.0);
  // Huge tau: C3 vacuously passes.
  CHECK(r.c3_latency_budget.satisfied);
  CHECK(r.all_satisfied());

  // Boundary tie counts as feasible.
  const double total_mem = r.c4_memory_budget.lhs;
  ConstraintReport tie = check_constraints(tasks, zeros, ConstraintBounds{1e18, total_mem});
  CHECK(tie.c4_memory_budget.satisfied);
  CHECK(tie.c4_memory_budget.slack() == 0.0);
}

TEST_CASE("check_constraints agrees with an independent evaluator") {
  std::mt19937_64 rng(37);
  std::vector<TaskProfile> tasks;
  for (int i = 0; i < 8; ++i) tasks.push_back(random_profile(rng, i));
  const ConstraintBounds bounds{30.0, 400.0};
  for (std::uint32_t mask = 0; mask < (1u << 8); ++mask) {
    std::vector<std::uint8_t> x(8);
    for (int b = 0; b < 8; ++b) x[b] = (mask >> b) & 1u;
    const ConstraintReport r = check_constraints(tasks, x, bounds);

    // Independent evaluator, written from the constraint definitions.
    double off_t = 0, loc_t = 0, off_e = 0, loc_e = 0, mem = 0;
    for (int n = 0; n < 8; ++n) {
      const TaskProfile& p = tasks[n];
      const double t_off = p.size_bits * p.cpu_per_bit_enc / p.freq_local +
                           p.size_bits * p.cpu_per_bit_edge / p.freq_edge +
                           p.size_bits / p.rate_bits_per_sec;
      const double e_off = p.power_enc * p.size_bits * p.cpu_per_bit_enc / p.freq_local +
                           p.power_trans * p.size_bits / p.rate_bits_per_sec;
      if (x[n]) {
        off_t += t_off;
        off_e += e_off;
        mem += p.mem_offload;
      } else {
        loc_t += p.size_bits * p.cpu_per_bit_local / p.freq_local;
        loc_e += p.energy_local;
        mem += p.mem_local;
      }
    }
    CHECK(r.c1_offload_time_tradeoff.satisfied == (off_t <= loc_t));
    CHECK(r.c2_offload_energy_tradeoff.satisfied == (off_e <= loc_e));
    CHECK(r.c3_latency_budget.satisfied == (off_t + loc_t <= bounds.tau));
    CHECK(r.c4_memory_budget.satisfied == (mem <= bounds.zeta));
  }
}

TEST_CASE("flipping one bit moves exactly that task's terms across C1/C2") {
  std::mt19937_64 rng(41);
  std::vector<TaskProfile> tasks;
  for (int i = 0; i < 6; ++i) tasks.push_back(random_profile(rng, i));
  const ConstraintBounds bounds{1e9, 1e9};
  std::vector<std::uint8_t> x(6, 0);
  const ConstraintReport before = check_constraints(tasks, x, bounds);
  for (int n = 0; n < 6; ++n) {
    auto flipped = x;
    flipped[n] = 1;
    const ConstraintReport after = check_constraints(tasks, flipped, bounds);
    CHECK(after.c1_offload_time_tradeoff.lhs - before.c1_offload_time_tradeoff.lhs ==
          doctest::Approx(offload_time(tasks[n])).epsilon(1e-12));
    CHECK(before.c1_offload_time_tradeoff.rhs - after.c1_offload_time_tradeoff.rhs ==
          doctest::Approx(local_time(tasks[n])).epsilon(1e-12));
    CHECK(after.c2_offload_energy_tradeoff.lhs - before.c2_offload_energy_tradeoff.lhs ==
          doctest::Approx(offload_energy(tasks[n])).epsilon(1e-12));
  }
}

TEST_CASE("offload-only coefficients never leak into local costs") {
  TaskProfile p = simple_profile();
  const CostTriple local_before = blended_costs(p, 0);
  p.cpu_per_bit_enc *= 10;
  p.cpu_per_bit_edge *= 7;
  p.power_enc *= 3;
  p.power_trans *= 2;
  p.mem_offload *= 5;
  const CostTriple local_after = blended_costs(p, 0);
  CHECK(local_before.time_s == local_after.time_s);
  CHECK(local_before.energy_mah == local_after.energy_mah);
  CHECK(local_before.memory_mb == local_after.memory_mb);
}

TEST_CASE("cost_breakdown aggregates equal the per-task sums exactly") {
  std::mt19937_64 rng(43);
  std::vector<TaskProfile> tasks;
  for (int i = 0; i < 9; ++i) tasks.push_back(random_profile(rng, i));
  std::vector<std::uint8_t> x(9);
  for (int i = 0; i < 9; ++i) x[i] = static_cast<std::uint8_t>(rng() & 1);
  const CostWeights w;
  const CostBreakdown breakdown = cost_breakdown(tasks, x, w);
  double t = 0, e = 0, m = 0;
  for (const auto& c : breakdown.per_task) {
    t += c.time_s;
    e += c.energy_mah;
    m += c.memory_mb;
  }
  // Same summation order -> bitwise equality.
  CHECK(breakdown.totals.time_s == t);
  CHECK(breakdown.totals.energy_mah == e);
  CHECK(breakdown.totals.memory_mb == m);
  CHECK(breakdown.objective_value == doctest::Approx(objective(tasks, x, w)).epsilon(1e-15));
}
