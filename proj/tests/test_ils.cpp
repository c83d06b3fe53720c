#include <doctest.h>

#include <algorithm>

#include "fchp/construct.hpp"
#include "fchp/errors.hpp"
#include "fchp/evaluate.hpp"
#include "fchp/ils.hpp"
#include "support.hpp"

using namespace fchp;
using fchp::testing::Builder;

namespace {

Instance two_server_instance() {
  Builder b;
  b.origin(20000, 20000).cloud(20000, 20000).content(5400).request(0, 0).request(0, 0).horizon(3);
  b.instance.costs.attend = {90.0, 90.0};
  b.instance.costs.copy = {30.0};
  return b.build();
}

bool any_kind(const std::vector<ScoredMove>& moves, MoveKind kind) {
  return std::any_of(moves.begin(), moves.end(), [&](const ScoredMove& m) { return m.move.kind == kind; });
}

}  // namespace

TEST_SUITE("ils") {
  TEST_CASE("neighborhoods that need more than one tuple or request are empty") {
    const auto inst = two_server_instance();
    Evaluator ev(inst);
    Rng rng(1);
    const Solution one{{{content_id(0), server_id(0), {request_id(0), request_id(1)}, 0}}};
    CHECK(neighborhood_moves(Neighborhood::Swap, one, ev, rng, {}).empty());
    CHECK(neighborhood_moves(Neighborhood::Merge, one, ev, rng, {}).empty());
    CHECK_FALSE(neighborhood_moves(Neighborhood::Split, one, ev, rng, {}).empty());

    const Solution singles{{{content_id(0), server_id(0), {request_id(0)}, 0},
                            {content_id(0), server_id(0), {request_id(1)}, 1}}};
    CHECK(neighborhood_moves(Neighborhood::Split, singles, ev, rng, {}).empty());
  }

  TEST_CASE("delay respects arrivals") {
    const auto inst = two_server_instance();
    Evaluator ev(inst);
    Rng rng(1);
    const Solution at_arrival{{{content_id(0), server_id(0), {request_id(0), request_id(1)}, 0}}};
    const auto moves = neighborhood_moves(Neighborhood::Delay, at_arrival, ev, rng, {});
    CHECK_FALSE(any_kind(moves, MoveKind::DelayMinus));
    CHECK(any_kind(moves, MoveKind::DelayPlus));

    const Solution late{{{content_id(0), server_id(0), {request_id(0), request_id(1)}, 2}}};
    const auto back = neighborhood_moves(Neighborhood::Delay, late, ev, rng, {});
    CHECK(any_kind(back, MoveKind::DelayMinus));
    CHECK_FALSE(any_kind(back, MoveKind::DelayPlus));  // horizon ends at 2
  }

  TEST_CASE("shift onto a holder saves the copy") {
    const auto inst = two_server_instance();
    const Solution s{{{content_id(0), server_id(0), {request_id(0)}, 0},
                      {content_id(0), server_id(1), {request_id(1)}, 0}}};
    Move m;
    m.kind = MoveKind::Shift;
    m.a = 1;
    m.to = server_id(0);
    m.first = s.assignments[1];
    const auto [next, delta] = apply_move(s, m, inst);
    CHECK(delta == doctest::Approx(-30.0));
    CHECK(evaluate(inst, next).total == doctest::Approx(evaluate(inst, s).total + delta));
  }

  TEST_CASE("merge keeps attendance and delay adds the penalty") {
    const auto inst = two_server_instance();
    const Solution s{{{content_id(0), server_id(0), {request_id(0)}, 0},
                      {content_id(0), server_id(1), {request_id(1)}, 0}}};
    Move merge;
    merge.kind = MoveKind::Merge;
    merge.a = 0;
    merge.b = 1;
    merge.to = server_id(0);
    merge.first = s.assignments[0];
    merge.second = s.assignments[1];
    const auto [merged, d1] = apply_move(s, merge, inst);
    CHECK(merged.assignments.size() == 1);
    CHECK(evaluate(inst, merged).attend == evaluate(inst, s).attend);
    CHECK(d1 == doctest::Approx(-30.0));

    Move delay;
    delay.kind = MoveKind::DelayPlus;
    delay.a = 0;
    delay.delay = 1;
    delay.first = s.assignments[0];
    const auto [later, d2] = apply_move(s, delay, inst);
    CHECK(later.assignments[0].period == 1);
    CHECK(d2 == doctest::Approx(180.0));
  }

  TEST_CASE("moves against a changed solution are stale") {
    const auto inst = two_server_instance();
    const Solution s{{{content_id(0), server_id(0), {request_id(0)}, 0},
                      {content_id(0), server_id(1), {request_id(1)}, 0}}};
    Move m;
    m.kind = MoveKind::Shift;
    m.a = 0;
    m.to = server_id(1);
    m.first = s.assignments[1];  // does not match tuple 0
    CHECK_THROWS_AS(apply_structural(s, m), StaleMove);
  }

  TEST_CASE("reported deltas match full re-evaluation across the corpus") {
    const MoveParams params{1, 50};
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const auto inst = fchp::testing::random_instance(seed);
      Rng rng(seed);
      const auto s = fchp::testing::random_feasible_solution(inst, rng);
      if (!s) continue;
      Evaluator ev(inst);
      const double base = evaluate(inst, *s).total;
      for (auto kind : kAllNeighborhoods) {
        for (const auto& sm : neighborhood_moves(kind, *s, ev, rng, params)) {
          const auto [next, delta] = apply_move(*s, sm.move, inst);
          CHECK(check_feasibility(inst, next).empty());
          CHECK(delta == doctest::Approx(sm.delta).epsilon(1e-9));
          CHECK(evaluate(inst, next).total == doctest::Approx(base + delta).epsilon(1e-9));
        }
      }
    }
  }

  TEST_CASE("rvnd takes an improving shift and stops at a local optimum") {
    const auto inst = two_server_instance();
    const Solution s{{{content_id(0), server_id(1), {request_id(0)}, 0},
                      {content_id(0), server_id(0), {request_id(1)}, 0}}};
    Evaluator ev(inst);
    Rng rng(2);
    RvndStats stats;
    const auto out = rvnd(s, ev, rng, {}, &stats, true);
    CHECK(evaluate(inst, out).total < evaluate(inst, s).total);
    CHECK(evaluate(inst, out).total == doctest::Approx(180.0));
    CHECK(stats.accepted[0] + stats.accepted[3] >= 1);
  }

  TEST_CASE("rvnd is idempotent at its fixpoint") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const auto inst = fchp::testing::random_instance(seed);
      Rng rng(seed);
      Solution s;
      try {
        s = construct_solution(inst, rng);
      } catch (const Infeasible&) {
        continue;
      }
      Evaluator ev(inst);
      const auto once = rvnd(s, ev, rng, {});
      CHECK(evaluate(inst, once).total <= evaluate(inst, s).total + 1e-9);
      RvndStats stats;
      const auto twice = rvnd(once, ev, rng, {}, &stats);
      CHECK(twice == once);
      CHECK(stats.accepted == std::array<std::int64_t, 5>{});
    }
  }

  TEST_CASE("perturbation applies level + 1 moves and stays feasible") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const auto inst = fchp::testing::random_instance(seed);
      Rng rng(seed);
      const auto s = fchp::testing::random_feasible_solution(inst, rng);
      if (!s) continue;
      Evaluator ev(inst);
      bool movable = false;
      for (auto kind : kPerturbationNeighborhoods) {
        Rng probe(seed);
        movable = movable || !neighborhood_moves(kind, *s, ev, probe, {}).empty();
      }
      for (int level : {0, 3, 6}) {
        int applied = -1;
        const auto p = perturb(*s, level, rng, ev, {}, &applied);
        CHECK(applied <= level + 1);
        CHECK(applied >= 0);
        CHECK(check_feasibility(inst, p).empty());
        if (level == 0) CHECK(applied == (movable ? 1 : 0));
      }
    }
  }

  TEST_CASE("greedy optimum is left untouched") {
    Builder b;
    b.origin(1e6, 1e6).content(300).content(120).request(0, 0).request(1, 0).request(0, 1).horizon(2);
    const auto inst = b.build();
    IlsConfig cfg;
    cfg.seed = 3;
    cfg.threads = 1;
    const auto res = ils_solve(inst, cfg);
    CHECK(res.cost.total == doctest::Approx(5.0 + 2.0 + 5.0));
    for (const auto& st : res.stats.starts) {
      CHECK(st.rvnd.accepted == std::array<std::int64_t, 5>{});
    }
  }

  TEST_CASE("every start ends no worse than it began; runs repeat exactly") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
      const auto inst = fchp::testing::random_instance(seed);
      IlsConfig cfg;
      cfg.seed = seed;
      cfg.threads = 1;
      cfg.verify_deltas = true;
      IlsResult a;
      try {
        a = ils_solve(inst, cfg);
      } catch (const Infeasible&) {
        continue;
      }
      for (const auto& st : a.stats.starts) CHECK(st.final_cost <= st.constructive_cost + 1e-9);
      CHECK(check_feasibility(inst, a.best).empty());

      cfg.threads = 3;
      const auto b = ils_solve(inst, cfg);
      CHECK(b.cost.total == a.cost.total);
      CHECK(b.best == a.best);
      REQUIRE(b.stats.starts.size() == a.stats.starts.size());
      for (std::size_t i = 0; i < a.stats.starts.size(); ++i) {
        CHECK(b.stats.starts[i].rvnd.accepted == a.stats.starts[i].rvnd.accepted);
        CHECK(b.stats.starts[i].perturbation_moves == a.stats.starts[i].perturbation_moves);
      }
    }
  }

  TEST_CASE("config validation") {
    IlsConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.iter_max = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.level_max = -1;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.delay_d = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.move_sample_cap = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
  }
}
