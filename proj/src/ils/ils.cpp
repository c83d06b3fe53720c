#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "fchp/construct.hpp"
#include "fchp/errors.hpp"
#include "fchp/ils.hpp"

namespace fchp {

namespace {

// Relative margin below which two objective values count as equal.
constexpr double kImprovementEps = 1e-9;

bool improves(double candidate, double incumbent) {
  return candidate < incumbent - kImprovementEps * std::max(1.0, std::abs(incumbent));
}

double total_of(Evaluator& evaluator, const Solution& s) {
  const auto total = evaluator.feasible_total(s);
  if (!total) throw Error("search reached an infeasible solution");
  return *total;
}

constexpr int kConstructAttempts = 32;

// Reruns the randomized greedy on the same stream until a draw succeeds or
// kConstructAttempts draws have failed.
Solution construct_with_retries(const Instance& instance, Rng& rng) {
  for (int attempt = 1;; ++attempt) {
    try {
      return construct_solution(instance, rng);
    } catch (const Infeasible&) {
      if (attempt == kConstructAttempts) throw;
    }
  }
}

StartStats run_start(const Instance& instance, const IlsConfig& config, std::size_t start,
                     Solution& best_out) {
  Rng rng(derive_seed(config.seed, start));
  Evaluator evaluator(instance);
  const MoveParams params{config.delay_d, config.move_sample_cap};

  StartStats stats;
  Solution s = construct_with_retries(instance, rng);
  stats.constructive_cost = total_of(evaluator, s);
  s = rvnd(std::move(s), evaluator, rng, params, &stats.rvnd, config.verify_deltas);
  double fs = total_of(evaluator, s);
  stats.after_local_search = fs;

  int level = 0;
  while (level < config.level_max) {
    LevelEvent ev;
    ev.level = level;
    Solution candidate = perturb(s, level, rng, evaluator, params, &ev.perturbation_moves);
    candidate = rvnd(std::move(candidate), evaluator, rng, params, &stats.rvnd, config.verify_deltas);
    const double fc = total_of(evaluator, candidate);
    ev.candidate = fc;
    stats.perturbation_moves += ev.perturbation_moves;
    if (improves(fc, fs)) {
      s = std::move(candidate);
      fs = fc;
      level = 0;
      ev.improved = true;
    } else {
      ++level;
    }
    ev.level_after = level;
    ev.incumbent = fs;
    stats.events.push_back(ev);
  }
  stats.final_cost = fs;
  canonicalize(s);
  best_out = std::move(s);
  return stats;
}

}  // namespace

void IlsConfig::validate() const {
  if (iter_max < 1) throw DomainError("iter_max must be >= 1");
  if (level_max < 0) throw DomainError("level_max must be >= 0");
  if (delay_d < 1) throw DomainError("delay_d must be >= 1");
  if (move_sample_cap < 1) throw DomainError("move_sample_cap must be >= 1");
}

Solution rvnd(Solution solution, Evaluator& evaluator, Rng& rng, const MoveParams& params,
              RvndStats* stats, bool verify_deltas) {
  double current = total_of(evaluator, solution);
  std::vector<Neighborhood> remaining(kAllNeighborhoods.begin(), kAllNeighborhoods.end());
  while (!remaining.empty()) {
    const auto pick = static_cast<std::size_t>(rng.below(remaining.size()));
    const Neighborhood kind = remaining[pick];
    const auto moves = neighborhood_moves(kind, solution, evaluator, rng, params);
    if (stats != nullptr) ++stats->passes;

    const ScoredMove* best = nullptr;
    for (const auto& m : moves) {
      if (best == nullptr || m.total < best->total) best = &m;
    }
    if (best == nullptr || !improves(best->total, current)) {
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
      continue;
    }

    if (verify_deltas) {
      const auto [check, delta] = apply_move(solution, best->move, evaluator.instance());
      if (std::abs(delta - best->delta) > 1e-9 * std::max(1.0, std::abs(current))) {
        throw Error(std::string("delta mismatch on ") + to_string(best->move.kind) + ": " +
                    std::to_string(delta) + " vs " + std::to_string(best->delta));
      }
    }
    solution = apply_structural(solution, best->move);
    current = best->total;
    if (stats != nullptr) ++stats->accepted[static_cast<std::size_t>(kind)];
    remaining.assign(kAllNeighborhoods.begin(), kAllNeighborhoods.end());
  }
  return solution;
}

Solution perturb(Solution solution, int level, Rng& rng, Evaluator& evaluator,
                 const MoveParams& params, int* applied) {
  MoveParams one = params;
  one.sample_cap = 1;
  int done = 0;
  for (int step = 0; step <= level; ++step) {
    auto kinds = kPerturbationNeighborhoods;
    rng.shuffle(std::span<Neighborhood>(kinds));
    bool moved = false;
    for (Neighborhood kind : kinds) {
      const auto moves = neighborhood_moves(kind, solution, evaluator, rng, one);
      if (moves.empty()) continue;
      solution = apply_structural(solution, moves.front().move);
      moved = true;
      break;
    }
    if (!moved) break;
    ++done;
  }
  if (applied != nullptr) *applied = done;
  return solution;
}

IlsResult ils_solve(const Instance& instance, const IlsConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const auto starts = static_cast<std::size_t>(config.iter_max);

  std::vector<Solution> finals(starts);
  std::vector<StartStats> stats(starts);
  std::vector<std::exception_ptr> errors(starts);

  unsigned threads = config.threads != 0 ? config.threads : default_thread_count();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(starts)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < starts; i = next++) {
      try {
        stats[i] = run_start(instance, config, i, finals[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  IlsResult result;
  std::optional<double> best;
  for (std::size_t i = 0; i < starts; ++i) {
    if (!best || improves(stats[i].final_cost, *best)) {
      best = stats[i].final_cost;
      result.best = finals[i];
    }
    result.stats.best_after_start.push_back(*best);
  }
  result.stats.starts = std::move(stats);
  result.cost = evaluate(instance, result.best);
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("FCHP_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

}  // namespace fchp
