#include <doctest.h>

#include <algorithm>

#include "fchp/errors.hpp"
#include "fchp/evaluate.hpp"
#include "fchp/io.hpp"
#include "fchp/rng.hpp"
#include "fchp/timeline.hpp"
#include "support.hpp"

using namespace fchp;
using fchp::testing::Builder;

namespace {

bool has_rule(const std::vector<Violation>& v, Rule rule) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

Instance one_request_instance() {
  Builder b;
  b.origin(10000, 10000).cloud(10000, 10000).content(5400).request(0, 0).horizon(3);
  b.instance.costs.attend = {90.0};
  b.instance.costs.copy = {90.0};
  return b.build();
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("timeline: serving from the origin moves nothing") {
    const auto inst = one_request_instance();
    const Solution s{{{content_id(0), server_id(0), {request_id(0)}, 0}}};
    const auto tl = derive_timeline(inst, s);
    CHECK(tl.copy_events.empty());
    for (const auto& active : tl.hire_activity) CHECK(active.empty());
  }

  TEST_CASE("timeline: a cloud assignment forces one copy and activates the server") {
    const auto inst = one_request_instance();
    const Solution s{{{content_id(0), server_id(1), {request_id(0)}, 1}}};
    const auto tl = derive_timeline(inst, s);
    REQUIRE(tl.copy_events.size() == 1);
    CHECK(tl.copy_events[0] == CopyEvent{content_id(0), server_id(0), server_id(1), 1});
    CHECK(tl.hire_activity[1] == std::vector<int>{1});
  }

  TEST_CASE("timeline: replicas persist across periods") {
    Builder b;
    b.origin(2000, 2000).cloud(2000, 2000).content(500).request(0, 0).request(0, 1).horizon(3);
    const auto inst = b.build();
    const Solution s{{{content_id(0), server_id(1), {request_id(0)}, 0},
                      {content_id(0), server_id(1), {request_id(1)}, 1}}};
    const auto tl = derive_timeline(inst, s);
    REQUIRE(tl.copy_events.size() == 1);
    CHECK(tl.copy_events[0].period == 0);
    CHECK(tl.holdings[2][1] == std::vector<ContentId>{content_id(0)});
    // active from the first replica through the last period it serves
    CHECK(tl.hire_activity[1] == std::vector<int>{0, 1});
  }

  TEST_CASE("timeline: least recently used replica is evicted, never the sole one") {
    Builder b;
    b.origin(2000, 2000).cloud(500, 2000).content(400).content(400).request(0, 0).request(1, 1).request(0, 2).horizon(3);
    const auto inst = b.build();
    const Solution s{{{content_id(0), server_id(1), {request_id(0)}, 0},
                      {content_id(1), server_id(1), {request_id(1)}, 1},
                      {content_id(0), server_id(1), {request_id(2)}, 2}}};
    const auto tl = derive_timeline(inst, s);
    CHECK(tl.copy_events.size() == 3);
    REQUIRE(tl.evictions.size() == 2);
    CHECK(tl.evictions[0] == Eviction{content_id(0), server_id(1), 1});
    CHECK(tl.evictions[1] == Eviction{content_id(1), server_id(1), 2});
    for (const auto& period : tl.holdings) {
      for (const auto& c : inst.contents) {
        const bool held = std::any_of(period.begin(), period.end(), [&](const std::vector<ContentId>& h) {
          return std::find(h.begin(), h.end(), c.id) != h.end();
        });
        CHECK(held);
      }
    }
  }

  TEST_CASE("timeline: a placement that cannot fit raises UnsatisfiableStorage") {
    Builder b;
    b.origin(2000, 2000).cloud(300, 2000).content(400).request(0, 0).horizon(1);
    const auto inst = b.build();
    const Solution s{{{content_id(0), server_id(1), {request_id(0)}, 0}}};
    CHECK_THROWS_AS(derive_timeline(inst, s), UnsatisfiableStorage);
    CHECK(has_rule(check_feasibility(inst, s), Rule::StorageExceeded));
  }

  TEST_CASE("timeline: unknown ids raise BrokenReference") {
    const auto inst = one_request_instance();
    const Solution s{{{content_id(0), server_id(7), {request_id(0)}, 0}}};
    CHECK_THROWS_AS(derive_timeline(inst, s), BrokenReference);
  }

  TEST_CASE("evaluate: no requests costs nothing") {
    Builder b;
    b.origin(1000, 1000).content(100).horizon(2);
    const auto c = evaluate(b.build(), Solution{});
    CHECK(c.total == 0.0);
    CHECK(c.attend == 0.0);
    CHECK(c.backlog == 0.0);
    CHECK(c.replication == 0.0);
    CHECK(c.servers_od == 0);
    CHECK(c.financial == 0.0);
  }

  TEST_CASE("evaluate: single request served at arrival from the origin") {
    const auto inst = one_request_instance();
    const auto c = evaluate(inst, Solution{{{content_id(0), server_id(0), {request_id(0)}, 0}}});
    CHECK(c.total == doctest::Approx(90.0));
    CHECK(c.attend == doctest::Approx(90.0));
    CHECK(c.backlog == 0.0);
    CHECK(c.replication == 0.0);
  }

  TEST_CASE("evaluate: one period late on a cloud server sums all three terms") {
    const auto inst = one_request_instance();
    const auto c = evaluate(inst, Solution{{{content_id(0), server_id(1), {request_id(0)}, 1}}});
    CHECK(c.attend == doctest::Approx(90.0));
    CHECK(c.backlog == doctest::Approx(180.0));
    CHECK(c.replication == doctest::Approx(90.0));
    CHECK(c.total == doctest::Approx(360.0));
    CHECK(c.servers_od == 1);
    CHECK(c.financial == doctest::Approx(1.0));
  }

  TEST_CASE("evaluate: incomplete plans are rejected") {
    Builder b;
    b.origin(1000, 1000).content(100).request(0, 0).request(0, 0).horizon(1);
    const auto inst = b.build();
    const Solution s{{{content_id(0), server_id(0), {request_id(0)}, 0}}};
    CHECK_THROWS_AS(evaluate(inst, s), IncompleteSolution);
    const auto v = check_feasibility(inst, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == Rule::Unattended);
    CHECK(v[0].request == std::optional<std::size_t>(1));
  }

  TEST_CASE("feasibility: bandwidth over the limit is reported") {
    Builder b;
    b.origin(1000, 1000).content(600).request(0, 0).request(0, 0).horizon(2);
    const auto inst = b.build();
    const Solution s{{{content_id(0), server_id(0), {request_id(0), request_id(1)}, 0}}};
    const auto v = check_feasibility(inst, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == Rule::BandwidthExceeded);
    CHECK(v[0].server == std::optional<std::size_t>(0));
    CHECK(v[0].period == std::optional<int>(0));
    CHECK(v[0].to_string().rfind("BandwidthExceeded server=0", 0) == 0);
  }

  TEST_CASE("feasibility: a valid plan has no violations") {
    const auto inst = one_request_instance();
    CHECK(check_feasibility(inst, Solution{{{content_id(0), server_id(0), {request_id(0)}, 0}}}).empty());
  }

  TEST_CASE("feasibility: malformed tuples") {
    Builder b;
    b.origin(1000, 1000).content(100).content(100, 0, 1).request(0, 1).request(1, 1).horizon(3);
    const auto inst = b.build();
    CHECK(has_rule(check_feasibility(inst, Solution{{{content_id(0), server_id(0), {request_id(0)}, 0},
                                                     {content_id(1), server_id(0), {request_id(1)}, 1}}}),
                   Rule::ServedBeforeArrival));
    CHECK(has_rule(check_feasibility(inst, Solution{{{content_id(1), server_id(0), {request_id(0)}, 1},
                                                     {content_id(1), server_id(0), {request_id(1)}, 1}}}),
                   Rule::ContentMismatch));
    CHECK(has_rule(check_feasibility(inst, Solution{{{content_id(0), server_id(0), {request_id(0), request_id(0)}, 1},
                                                     {content_id(1), server_id(0), {request_id(1)}, 1}}}),
                   Rule::DuplicateAssignment));
    CHECK(has_rule(check_feasibility(inst, Solution{{{content_id(0), server_id(0), {}, 1},
                                                     {content_id(0), server_id(0), {request_id(0)}, 1},
                                                     {content_id(1), server_id(0), {request_id(1)}, 1}}}),
                   Rule::EmptyAssignment));
    CHECK(has_rule(check_feasibility(inst, Solution{{{content_id(0), server_id(0), {request_id(0)}, 5},
                                                     {content_id(1), server_id(0), {request_id(1)}, 1}}}),
                   Rule::PeriodOutOfRange));
  }

  TEST_CASE("evaluate is independent of assignment order") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const auto inst = fchp::testing::random_instance(seed);
      Rng rng(seed);
      auto s = fchp::testing::random_feasible_solution(inst, rng);
      if (!s) continue;
      const auto before = evaluate(inst, *s);
      std::reverse(s->assignments.begin(), s->assignments.end());
      const auto after = evaluate(inst, *s);
      CHECK(before.total == after.total);
      CHECK(before.replication == after.replication);
      CHECK(before.servers_od == after.servers_od);
      CHECK(before.financial == after.financial);
    }
  }

  TEST_CASE("backlog has one term per waited period") {
    Builder b;
    b.origin(1000, 1000).content(120).request(0, 0).horizon(4);
    const auto inst = b.build();
    for (int t = 0; t < 4; ++t) {
      const auto c = evaluate(inst, Solution{{{content_id(0), server_id(0), {request_id(0)}, t}}});
      CHECK(c.backlog == doctest::Approx(t * 2.0 * 2.0));
    }
  }

  TEST_CASE("corpus properties: sole replicas survive, od count bounded, no cloud means no bill") {
    for (std::uint64_t seed = 100; seed < 160; ++seed) {
      const auto inst = fchp::testing::random_instance(seed);
      Rng rng(seed);
      const auto s = fchp::testing::random_feasible_solution(inst, rng);
      if (!s) continue;
      const auto tl = derive_timeline(inst, *s);
      for (std::size_t t = 0; t < tl.holdings.size(); ++t) {
        for (const auto& c : inst.contents) {
          if (static_cast<int>(t) < c.start_period) continue;
          int copies = 0;
          for (const auto& h : tl.holdings[t]) copies += static_cast<int>(std::count(h.begin(), h.end(), c.id));
          CHECK(copies >= 1);
        }
      }
      const auto cost = evaluate(inst, *s);
      CHECK(cost.servers_od <= static_cast<int>(inst.servers_in(Pool::cloud).size()));
      CHECK(cost.total == doctest::Approx(cost.attend + cost.backlog + cost.replication));
      if (cost.servers_od == 0) CHECK(cost.financial == 0.0);
    }
  }

  TEST_CASE("evaluator agrees with evaluate and flags capacity breaches") {
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
      const auto inst = fchp::testing::random_instance(seed);
      Rng rng(seed);
      const auto s = fchp::testing::random_feasible_solution(inst, rng);
      if (!s) continue;
      Evaluator ev(inst);
      const auto fast = ev.try_evaluate(*s);
      REQUIRE(fast);
      const auto full = evaluate(inst, *s);
      CHECK(fast->total == doctest::Approx(full.total).epsilon(1e-12));
      CHECK(fast->servers_od == full.servers_od);
      CHECK(fast->financial == doctest::Approx(full.financial));
    }
    Builder b;
    b.origin(1000, 1000).content(600).request(0, 0).request(0, 0).horizon(1);
    const auto inst = b.build();
    Evaluator ev(inst);
    CHECK_FALSE(ev.feasible_total(Solution{{{content_id(0), server_id(0), {request_id(0), request_id(1)}, 0}}}));
  }

  TEST_CASE("instance validation") {
    Builder b;
    b.cloud(1000, 1000).content(100).request(0, 0);
    CHECK_THROWS_AS(b.build(), InvalidInstance);  // no origin server

    Builder late;
    late.origin(1000, 1000).content(100, 0, 1).request(0, 0).horizon(2);
    CHECK_THROWS_AS(late.build(), InvalidInstance);

    Builder big;
    big.origin(100, 1000).content(500).request(0, 0);
    CHECK_THROWS_AS(big.build(), InvalidInstance);
  }

  TEST_CASE("default costs follow sizes") {
    Builder b;
    b.origin(1000, 1000).content(600).request(0, 0);
    const auto inst = b.build();
    CHECK(inst.attend_cost(request_id(0)) == doctest::Approx(10.0));
    CHECK(inst.copy_cost(content_id(0)) == doctest::Approx(1.0));
    CHECK(inst.backlog_penalty(request_id(0), 0) == doctest::Approx(20.0));
  }

  TEST_CASE("json round trip") {
    const auto inst = fchp::testing::random_instance(77);
    const auto back = instance_from_json(to_json(inst));
    CHECK(to_json(back) == to_json(inst));
    Rng rng(5);
    const auto s = fchp::testing::random_feasible_solution(inst, rng);
    REQUIRE(s);
    CHECK(solution_from_json(to_json(*s)) == *s);
    CHECK(solution_from_json(Json{{"assignments", to_json(*s)}, {"seed", 5}}) == *s);
    CHECK_THROWS_AS(instance_from_json(Json::parse(R"({"servers": []})")), Error);
  }

  TEST_CASE("rng streams are reproducible") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    Rng c(3);
    for (int i = 0; i < 1000; ++i) {
      const auto v = c.below(7);
      CHECK(v < 7);
      const double u = c.uniform();
      CHECK((u >= 0.0 && u < 1.0));
    }
  }
}
