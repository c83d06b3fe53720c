#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "fchp/evaluate.hpp"
#include "fchp/instance.hpp"
#include "fchp/rng.hpp"
#include "fchp/types.hpp"

namespace fchp {

enum class MoveKind { Shift, Swap, Split, Merge, DelayPlus, DelayMinus };
enum class Neighborhood { Shift, Swap, Split, Merge, Delay };

inline constexpr std::array<Neighborhood, 5> kAllNeighborhoods = {
    Neighborhood::Shift, Neighborhood::Swap, Neighborhood::Split, Neighborhood::Merge,
    Neighborhood::Delay};
inline constexpr std::array<Neighborhood, 4> kPerturbationNeighborhoods = {
    Neighborhood::Shift, Neighborhood::Swap, Neighborhood::Split, Neighborhood::Merge};

const char* to_string(MoveKind kind);
const char* to_string(Neighborhood kind);

/// A neighborhood move on tuple indices of one specific solution.
///
///   Shift      (k,ja,r,t)               -> (k,to,r,t)
///   Swap       (ka,ja,ra,ta),(kb,jb,rb,tb) -> (ka,jb,ra,ta),(kb,ja,rb,tb)
///   Split      (k,ja,r,t)               -> (k,to,part,t),(k,to_second,r\part,t)
///   Merge      (k,ja,ra,t),(k,jb,rb,t)  -> (k,to,ra+rb,t)
///   DelayPlus/DelayMinus  (k,j,r,t)     -> (k,j,r,t+/-d)
///
/// `first`/`second` snapshot the operands so a move applied to a different
/// solution is detected as stale.
struct Move {
  MoveKind kind = MoveKind::Shift;
  std::size_t a = 0;
  std::size_t b = 0;
  ServerId to{};
  ServerId to_second{};
  std::vector<RequestId> part;
  int delay = 0;
  Assignment first;
  Assignment second;
};

struct ScoredMove {
  Move move;
  double delta = 0.0;
  double total = 0.0;  // objective after the move
};

struct MoveParams {
  int delay_d = 1;
  std::size_t sample_cap = 200;
};

/// Applies `move` without any feasibility check. Throws StaleMove when the
/// operands no longer match.
Solution apply_structural(const Solution& solution, const Move& move);

/// Up to `params.sample_cap` feasible moves of `kind`, sampled uniformly
/// from the feasible ones, each with its exact objective delta.
std::vector<ScoredMove> neighborhood_moves(Neighborhood kind, const Solution& solution,
                                           Evaluator& evaluator, Rng& rng, const MoveParams& params);

/// New solution and its exact objective delta (full re-evaluation of both).
std::pair<Solution, double> apply_move(const Solution& solution, const Move& move,
                                       const Instance& instance);

struct RvndStats {
  std::array<std::int64_t, 5> accepted{};  // by Neighborhood
  std::int64_t passes = 0;
};

/// Randomized VND: draws a neighborhood from the remaining set, applies its
/// best improving sampled move and resets the set on improvement, drops the
/// neighborhood otherwise; stops when the set is empty.
Solution rvnd(Solution solution, Evaluator& evaluator, Rng& rng, const MoveParams& params,
              RvndStats* stats = nullptr, bool verify_deltas = false);

/// Applies level + 1 random feasible Shift/Swap/Split/Merge moves (fewer if
/// none is available). `applied`, when given, receives the count.
Solution perturb(Solution solution, int level, Rng& rng, Evaluator& evaluator,
                 const MoveParams& params, int* applied = nullptr);

struct IlsConfig {
  int iter_max = 3;
  int level_max = 7;
  int delay_d = 1;
  std::uint64_t seed = 0;
  std::size_t move_sample_cap = 200;
  unsigned threads = 0;        // 0 = FCHP_THREADS or hardware concurrency
  bool verify_deltas = false;  // re-check every accepted delta against evaluate()

  void validate() const;
};

/// One pass of the inner loop: the level it ran at and whether it improved.
struct LevelEvent {
  int level = 0;
  bool improved = false;
  int level_after = 0;
  int perturbation_moves = 0;
  double incumbent = 0.0;  // f(s) after the step
  double candidate = 0.0;  // f(s') after perturbation + RVND
};

struct StartStats {
  double constructive_cost = 0.0;
  double after_local_search = 0.0;
  double final_cost = 0.0;
  RvndStats rvnd;
  std::int64_t perturbation_moves = 0;
  std::vector<LevelEvent> events;
};

struct RunStats {
  std::vector<StartStats> starts;
  std::vector<double> best_after_start;  // f(s*) after each start
  double wall_seconds = 0.0;
};

struct IlsResult {
  Solution best;
  CostBreakdown cost;
  RunStats stats;
};

/// Multi-start ILS-RVND. Throws Infeasible when construction fails.
IlsResult ils_solve(const Instance& instance, const IlsConfig& config);

/// Worker count from FCHP_THREADS (0 or unset = hardware concurrency).
unsigned default_thread_count();

}  // namespace fchp
