#include "cellplan/sched_gradfree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cellplan/errors.hpp"

namespace cellplan {

double penalty_objective(const Schedule& s, const SchedulingModel& model, const Bounds& bounds,
                         const PenaltyWeights& w, const FeedbackMap* feedback) {
  const double d = eval_duration(s, model);
  const double c = static_cast<double>(eval_core_collisions(s, model));
  const double overrun = std::max(0.0, d - bounds.max_duration);
  double obj = d + w.collision * c * c + w.overrun * overrun * overrun;
  if (feedback) {
    auto it = feedback->entries.find(s.start_steps);
    if (it != feedback->entries.end())
      obj -= w.guide_feedback * it->second.first + w.roadmap_feedback * it->second.second;
  }
  return obj;
}

Schedule project_to_feasible(Schedule s, const SchedulingModel& model, const Bounds& bounds) {
  for (int c : model.topo_order) {
    const StepInterval iv = scheduling_interval(c, s.start_steps, model, bounds);
    if (iv.empty()) {
      s.start_steps[c] = iv.earliest;
    } else {
      s.start_steps[c] = std::clamp(s.start_steps[c], iv.earliest, iv.latest);
    }
  }
  return s;
}

namespace {

bool is_feasible(const Schedule& s, const SchedulingModel& model, const Bounds& bounds) {
  return eval_duration(s, model) <= bounds.max_duration + 1e-9 &&
         eval_core_collisions(s, model) == 0;
}

Schedule random_projected(const SchedulingModel& model, const Bounds& bounds, Rng& rng) {
  Schedule s;
  s.dt = model.dt;
  s.start_steps.resize(static_cast<std::size_t>(model.num_cores));
  for (int& v : s.start_steps) v = rng.uniform_int(0, bounds.max_step);
  return project_to_feasible(std::move(s), model, bounds);
}

Schedule make_initial(const SchedulingModel& model, const Bounds& bounds,
                      const OptimizerConfig& config, Rng& rng) {
  if (config.init == InitMode::random) return random_projected(model, bounds, rng);
  SamplingConfig sc;
  sc.distribution = config.heuristic_distribution;
  return sample_schedule(model, bounds, sc, rng);
}

struct BestTracker {
  const FeedbackMap* failed = nullptr;  // schedules known to fail motion planning
  Schedule best;
  double best_obj = std::numeric_limits<double>::infinity();
  Schedule best_feasible;
  double best_feasible_obj = std::numeric_limits<double>::infinity();
  bool has_feasible = false;

  void offer(const Schedule& s, double obj, const SchedulingModel& model, const Bounds& bounds) {
    if (obj < best_obj) {
      best_obj = obj;
      best = s;
    }
    if (obj < best_feasible_obj && !(failed && failed->contains(s)) &&
        is_feasible(s, model, bounds)) {
      best_feasible_obj = obj;
      best_feasible = s;
      has_feasible = true;
    }
  }

  OptResult result(std::vector<double> trace) const {
    OptResult r;
    r.feasible = has_feasible;
    r.best = has_feasible ? best_feasible : best;
    r.best_objective = has_feasible ? best_feasible_obj : best_obj;
    r.trace = std::move(trace);
    return r;
  }
};

}  // namespace

OptResult optimize_sa(const SchedulingModel& model, const Bounds& bounds,
                      const PenaltyWeights& w, const OptimizerConfig& config,
                      const FeedbackMap* feedback) {
  Rng rng(config.seed);
  const SaParams& p = config.sa;

  Schedule cur = make_initial(model, bounds, config, rng);
  double cur_obj = penalty_objective(cur, model, bounds, w, feedback);

  BestTracker tracker;
  tracker.failed = feedback;
  tracker.offer(cur, cur_obj, model, bounds);
  std::vector<double> trace;

  auto neighbour = [&](const Schedule& s) {
    Schedule n = s;
    const int coord = static_cast<int>(rng.uniform_index(n.start_steps.size()));
    int shift = rng.uniform_int(1, p.max_shift);
    if (rng.uniform() < 0.5) shift = -shift;
    n.start_steps[static_cast<std::size_t>(coord)] =
        std::max(0, n.start_steps[static_cast<std::size_t>(coord)] + shift);
    return project_to_feasible(std::move(n), model, bounds);
  };

  // Initial temperature from an accept-all probe walk (Aarts & van
  // Laarhoven): solve x0 = (m1 + m2 exp(-dE+/T)) / (m1 + m2) for T.
  double temperature;
  {
    int m1 = 0, m2 = 0;
    double increase_sum = 0.0;
    Schedule probe = cur;
    double probe_obj = cur_obj;
    for (int k = 0; k < p.probe_transitions; ++k) {
      Schedule next = neighbour(probe);
      const double obj = penalty_objective(next, model, bounds, w, feedback);
      const double diff = obj - probe_obj;
      if (diff > 0.0) {
        ++m2;
        increase_sum += diff;
      } else {
        ++m1;
      }
      probe = std::move(next);
      probe_obj = obj;
      tracker.offer(probe, probe_obj, model, bounds);
    }
    const double avg_increase = m2 > 0 ? increase_sum / m2 : 1.0;
    const double denom = config.sa.initial_acceptance * (m1 + m2) - m1;
    if (m2 > 0 && denom > 0.0 && m2 > denom) {
      temperature = avg_increase / std::log(static_cast<double>(m2) / denom);
    } else {
      // Probe saw (almost) no uphill moves; any warm temperature accepts.
      temperature = std::max(avg_increase, 1.0);
    }
  }

  std::vector<double> batch_costs;
  batch_costs.reserve(static_cast<std::size_t>(p.batch_size));
  for (int it = 0; it < config.iterations; ++it) {
    Schedule cand = neighbour(cur);
    const double cand_obj = penalty_objective(cand, model, bounds, w, feedback);
    const double diff = cand_obj - cur_obj;
    if (diff <= 0.0 || rng.uniform() < std::exp(-diff / temperature)) {
      cur = std::move(cand);
      cur_obj = cand_obj;
    }
    tracker.offer(cur, cur_obj, model, bounds);
    batch_costs.push_back(cur_obj);
    trace.push_back(tracker.has_feasible ? tracker.best_feasible_obj : tracker.best_obj);

    if (static_cast<int>(batch_costs.size()) >= p.batch_size) {
      const double mean =
          std::accumulate(batch_costs.begin(), batch_costs.end(), 0.0) / batch_costs.size();
      double var = 0.0;
      for (double c : batch_costs) var += (c - mean) * (c - mean);
      const double sigma = std::sqrt(var / batch_costs.size());
      if (sigma > 1e-12)
        temperature /= 1.0 + temperature * std::log(1.0 + p.cooling_delta) / (3.0 * sigma);
      batch_costs.clear();
    }
  }
  return tracker.result(std::move(trace));
}

OptResult optimize_pso(const SchedulingModel& model, const Bounds& bounds,
                       const PenaltyWeights& w, const OptimizerConfig& config,
                       const FeedbackMap* feedback) {
  Rng rng(config.seed);
  const PsoParams& p = config.pso;
  const std::size_t n = static_cast<std::size_t>(model.num_cores);

  std::vector<Schedule> x(static_cast<std::size_t>(p.particles));
  std::vector<std::vector<double>> v(static_cast<std::size_t>(p.particles),
                                     std::vector<double>(n));
  std::vector<Schedule> pbest(static_cast<std::size_t>(p.particles));
  std::vector<double> pbest_obj(static_cast<std::size_t>(p.particles));

  BestTracker tracker;
  tracker.failed = feedback;
  for (int i = 0; i < p.particles; ++i) {
    x[static_cast<std::size_t>(i)] = make_initial(model, bounds, config, rng);
    for (double& vj : v[static_cast<std::size_t>(i)])
      vj = rng.uniform(p.v_init_min, p.v_init_max);
    const double obj =
        penalty_objective(x[static_cast<std::size_t>(i)], model, bounds, w, feedback);
    pbest[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
    pbest_obj[static_cast<std::size_t>(i)] = obj;
    tracker.offer(x[static_cast<std::size_t>(i)], obj, model, bounds);
  }
  Schedule gbest = pbest[0];
  double gbest_obj = pbest_obj[0];
  for (int i = 1; i < p.particles; ++i) {
    if (pbest_obj[static_cast<std::size_t>(i)] < gbest_obj) {
      gbest_obj = pbest_obj[static_cast<std::size_t>(i)];
      gbest = pbest[static_cast<std::size_t>(i)];
    }
  }

  std::vector<double> trace;
  for (int it = 0; it < config.iterations; ++it) {
    for (int i = 0; i < p.particles; ++i) {
      auto& xi = x[static_cast<std::size_t>(i)];
      auto& vi = v[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < n; ++j) {
        const double e1 = rng.uniform();
        const double e2 = rng.uniform();
        vi[j] = p.inertia * vi[j] +
                p.social * e1 * (gbest.start_steps[j] - xi.start_steps[j]) +
                p.cognitive * e2 * (pbest[static_cast<std::size_t>(i)].start_steps[j] -
                                    xi.start_steps[j]);
      }
      Schedule moved = xi;
      for (std::size_t j = 0; j < n; ++j) {
        const double real = xi.start_steps[j] + vi[j];
        moved.start_steps[j] = std::max(0, static_cast<int>(std::llround(real)));
      }
      xi = project_to_feasible(std::move(moved), model, bounds);
      const double obj = penalty_objective(xi, model, bounds, w, feedback);
      if (obj < pbest_obj[static_cast<std::size_t>(i)]) {
        pbest_obj[static_cast<std::size_t>(i)] = obj;
        pbest[static_cast<std::size_t>(i)] = xi;
      }
      tracker.offer(xi, obj, model, bounds);
    }
    for (int i = 0; i < p.particles; ++i) {
      if (pbest_obj[static_cast<std::size_t>(i)] < gbest_obj) {
        gbest_obj = pbest_obj[static_cast<std::size_t>(i)];
        gbest = pbest[static_cast<std::size_t>(i)];
      }
    }
    trace.push_back(tracker.has_feasible ? tracker.best_feasible_obj : tracker.best_obj);
  }
  return tracker.result(std::move(trace));
}

OptResult optimize_ea(const SchedulingModel& model, const Bounds& bounds,
                      const PenaltyWeights& w, const OptimizerConfig& config,
                      const FeedbackMap* feedback) {
  Rng rng(config.seed);
  const EaParams& p = config.ea;
  const std::size_t n = static_cast<std::size_t>(model.num_cores);

  std::vector<Schedule> pop(static_cast<std::size_t>(p.population));
  std::vector<double> obj(static_cast<std::size_t>(p.population));
  BestTracker tracker;
  tracker.failed = feedback;
  for (int i = 0; i < p.population; ++i) {
    pop[static_cast<std::size_t>(i)] = make_initial(model, bounds, config, rng);
    obj[static_cast<std::size_t>(i)] =
        penalty_objective(pop[static_cast<std::size_t>(i)], model, bounds, w, feedback);
    tracker.offer(pop[static_cast<std::size_t>(i)], obj[static_cast<std::size_t>(i)], model,
                  bounds);
  }

  auto crossover = [&](const Schedule& a, const Schedule& b) {
    // n-point crossover: blocks alternate between parents.
    std::vector<int> cuts;
    const int max_cut = static_cast<int>(n) - 1;
    const int points = std::min(p.crossover_points, max_cut);
    while (static_cast<int>(cuts.size()) < points) {
      const int cut = rng.uniform_int(1, max_cut);
      if (std::find(cuts.begin(), cuts.end(), cut) == cuts.end()) cuts.push_back(cut);
    }
    std::sort(cuts.begin(), cuts.end());
    Schedule child = a;
    bool from_a = true;
    std::size_t cut_idx = 0;
    for (std::size_t j = 0; j < n; ++j) {
      while (cut_idx < cuts.size() && static_cast<int>(j) == cuts[cut_idx]) {
        from_a = !from_a;
        ++cut_idx;
      }
      child.start_steps[j] = from_a ? a.start_steps[j] : b.start_steps[j];
    }
    return child;
  };

  auto mutate = [&](Schedule& s) {
    if (p.mutation_fraction <= 0.0) return;
    const auto k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(p.mutation_fraction * static_cast<double>(n))));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t pick = j + rng.uniform_index(n - j);
      std::swap(idx[j], idx[pick]);
      const std::size_t gene = idx[j];
      const double mutated = rng.normal(s.start_steps[gene], p.mutation_sigma);
      s.start_steps[gene] =
          std::clamp(static_cast<int>(std::llround(mutated)), 0, bounds.max_step);
    }
  };

  std::vector<double> trace;
  for (int it = 0; it < config.iterations; ++it) {
    std::vector<std::size_t> rank(pop.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t a, std::size_t b) { return obj[a] < obj[b]; });

    std::vector<Schedule> next;
    std::vector<double> next_obj;
    for (int k = 0; k < p.descendants; ++k) {
      const std::size_t pa = rank[rng.uniform_index(static_cast<std::size_t>(p.parents))];
      std::size_t pb = pa;
      while (p.parents > 1 && pb == pa)
        pb = rank[rng.uniform_index(static_cast<std::size_t>(p.parents))];
      Schedule child = crossover(pop[pa], pop[pb]);
      mutate(child);
      child = project_to_feasible(std::move(child), model, bounds);
      const double o = penalty_objective(child, model, bounds, w, feedback);
      tracker.offer(child, o, model, bounds);
      next.push_back(std::move(child));
      next_obj.push_back(o);
    }
    for (int e = 0; e < p.elites; ++e) {
      next.push_back(pop[rank[static_cast<std::size_t>(e)]]);
      next_obj.push_back(obj[rank[static_cast<std::size_t>(e)]]);
    }
    pop = std::move(next);
    obj = std::move(next_obj);
    trace.push_back(tracker.has_feasible ? tracker.best_feasible_obj : tracker.best_obj);
  }
  return tracker.result(std::move(trace));
}

}  // namespace cellplan
