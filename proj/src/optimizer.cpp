#include "hcsim/optimizer.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hcsim {

namespace {

struct Fitness {
  bool feasible = false;
  double value = 0;  // objective, plus penalty when infeasible

  bool better_than(const Fitness& other) const {
    if (feasible != other.feasible) return feasible;
    return value < other.value;
  }
};

Fitness evaluate(std::span<const TaskProfile> tasks, std::span<const std::uint8_t> x,
                 const CostWeights& weights, const ConstraintBounds& bounds,
                 double penalty_coefficient, ConstraintReport* report_out) {
  const ConstraintReport report = check_constraints(tasks, x, bounds);
  Fitness f;
  f.feasible = report.all_satisfied();
  f.value = objective(tasks, x, weights);
  if (!f.feasible) f.value += penalty_coefficient * report.total_violation();
  if (report_out) *report_out = report;
  return f;
}

OffloadDecision to_decision(std::span<const TaskProfile> tasks, std::vector<std::uint8_t> x,
                            const CostWeights& weights, const ConstraintBounds& bounds) {
  OffloadDecision d;
  d.report = check_constraints(tasks, x, bounds);
  d.feasible = d.report.all_satisfied();
  d.objective = objective(tasks, x, weights);
  d.x = std::move(x);
  return d;
}

}  // namespace

void PsoConfig::validate() const {
  if (swarm_size < 2) throw std::invalid_argument("swarm_size must be >= 2");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(v_max > 0)) throw std::invalid_argument("v_max must be positive");
  if (!(penalty_coefficient > 0)) throw std::invalid_argument("penalty coefficient must be positive");
}

OffloadDecision solve_pso(std::span<const TaskProfile> tasks, const CostWeights& weights,
                          const ConstraintBounds& bounds, const PsoConfig& cfg) {
  if (tasks.empty()) throw std::invalid_argument("instance must contain at least one task");
  cfg.validate();
  weights.validate();
  bounds.validate();
  for (const auto& p : tasks) p.validate(p.rate_bits_per_sec);

  const std::size_t n = tasks.size();
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::vector<std::vector<std::uint8_t>> position(cfg.swarm_size, std::vector<std::uint8_t>(n));
  std::vector<std::vector<double>> velocity(cfg.swarm_size, std::vector<double>(n));
  std::vector<std::vector<std::uint8_t>> personal_best = position;
  std::vector<Fitness> personal_best_fitness(cfg.swarm_size);

  std::vector<std::uint8_t> global_best(n);
  Fitness global_best_fitness;

  for (int i = 0; i < cfg.swarm_size; ++i) {
    for (std::size_t b = 0; b < n; ++b) {
      position[i][b] = uniform(rng) < 0.5 ? 0 : 1;
      velocity[i][b] = (2.0 * uniform(rng) - 1.0) * cfg.v_max;
    }
    personal_best[i] = position[i];
    personal_best_fitness[i] =
        evaluate(tasks, position[i], weights, bounds, cfg.penalty_coefficient, nullptr);
    if (i == 0 || personal_best_fitness[i].better_than(global_best_fitness)) {
      global_best_fitness = personal_best_fitness[i];
      global_best = position[i];
    }
  }

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    for (int i = 0; i < cfg.swarm_size; ++i) {
      for (std::size_t b = 0; b < n; ++b) {
        const double r1 = uniform(rng);
        const double r2 = uniform(rng);
        double v = cfg.inertia * velocity[i][b] +
                   cfg.cognitive * r1 * (personal_best[i][b] - position[i][b]) +
                   cfg.social * r2 * (global_best[b] - position[i][b]);
        v = std::clamp(v, -cfg.v_max, cfg.v_max);
        velocity[i][b] = v;
        const double transfer = 1.0 / (1.0 + std::exp(-v));
        position[i][b] = uniform(rng) < transfer ? 1 : 0;
      }
      const Fitness f = evaluate(tasks, position[i], weights, bounds, cfg.penalty_coefficient, nullptr);
      if (f.better_than(personal_best_fitness[i])) {
        personal_best_fitness[i] = f;
        personal_best[i] = position[i];
      }
      if (f.better_than(global_best_fitness)) {
        global_best_fitness = f;
        global_best = position[i];
      }
    }
  }

  return to_decision(tasks, std::move(global_best), weights, bounds);
}

OffloadDecision brute_force_solve(std::span<const TaskProfile> tasks, const CostWeights& weights,
                                  const ConstraintBounds& bounds) {
  if (tasks.empty()) throw std::invalid_argument("instance must contain at least one task");
  if (tasks.size() > 20) {
    throw std::invalid_argument("brute force enumeration is capped at N=20 tasks");
  }
  weights.validate();
  bounds.validate();
  for (const auto& p : tasks) p.validate(p.rate_bits_per_sec);

  const std::size_t n = tasks.size();
  std::vector<std::uint8_t> x(n), best_feasible, best_any;
  double best_feasible_obj = 0, best_any_score = 0;
  bool have_feasible = false, have_any = false;

  // Lexicographic comparison on the decision vector (x[0] first).
  auto lex_less = [](const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  };

  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    for (std::size_t b = 0; b < n; ++b) x[b] = (mask >> b) & 1u;
    const ConstraintReport report = check_constraints(tasks, x, bounds);
    const double obj = objective(tasks, x, weights);
    if (report.all_satisfied()) {
      if (!have_feasible || obj < best_feasible_obj ||
          (obj == best_feasible_obj && lex_less(x, best_feasible))) {
        have_feasible = true;
        best_feasible_obj = obj;
        best_feasible = x;
      }
    }
    const double score = obj + (report.all_satisfied() ? 0.0 : report.total_violation());
    if (!have_any || score < best_any_score || (score == best_any_score && lex_less(x, best_any))) {
      have_any = true;
      best_any_score = score;
      best_any = x;
    }
  }

  return to_decision(tasks, have_feasible ? std::move(best_feasible) : std::move(best_any), weights,
                     bounds);
}

}  // namespace hcsim
