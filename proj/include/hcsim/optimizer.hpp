#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hcsim/cost_model.hpp"

namespace hcsim {

struct OffloadDecision {
  std::vector<std::uint8_t> x;  // one bit per task
  double objective = 0;         // recomputable from the cost model
  bool feasible = false;        // true only if all four constraints pass
  ConstraintReport report;
};

// Sigmoid-transfer binary PSO. Feasible particles always outrank infeasible
// ones; infeasible fitness carries a static penalty proportional to the
// summed constraint violations.
struct PsoConfig {
  int swarm_size = 30;
  int max_iterations = 200;
  double inertia = 0.7;
  double cognitive = 1.5;
  double social = 1.5;
  double v_max = 4.0;
  double penalty_coefficient = 1000.0;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

// Best decision found; if no particle was ever feasible, returns the best
// penalized decision with feasible=false. Bit-identical output for identical
// seeds and instances.
OffloadDecision solve_pso(std::span<const TaskProfile> tasks, const CostWeights& weights,
                          const ConstraintBounds& bounds, const PsoConfig& cfg);

// Exhaustive 2^N enumeration, N <= 20. Exact feasible optimum; ties broken
// by the lexicographically smallest decision vector.
OffloadDecision brute_force_solve(std::span<const TaskProfile> tasks, const CostWeights& weights,
                                  const ConstraintBounds& bounds);

}  // namespace hcsim
