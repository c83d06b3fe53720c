#include <algorithm>
#include <cmath>
#include <functional>

#include "fchp/errors.hpp"
#include "fchp/ils.hpp"

namespace fchp {

namespace {

// Beyond this many structural candidates we sample instead of enumerating.
constexpr double kEnumerateLimit = 20000.0;
// Feasibility tests per call, as a multiple of the sample cap.
constexpr std::size_t kTestsPerSample = 10;

int earliest_period(const Instance& inst, const Assignment& a) {
  int lo = inst.content(a.content).start_period;
  for (auto r : a.requests) lo = std::max(lo, inst.request(r).arrival_period);
  return lo;
}

std::vector<RequestId> split_part(const std::vector<RequestId>& r, std::uint64_t mask) {
  std::vector<RequestId> part{r[0]};
  for (std::size_t i = 1; i < r.size(); ++i) {
    if ((mask >> (i - 1)) & 1U) part.push_back(r[i]);
  }
  return part;
}

class CandidateSource {
 public:
  CandidateSource(Neighborhood kind, const Solution& sol, const Instance& inst, int delay_d)
      : kind_(kind), sol_(sol), inst_(inst), delay_d_(delay_d), servers_(inst.servers.size()) {
    const auto& as = sol.assignments;
    switch (kind) {
      case Neighborhood::Shift:
        size_ = static_cast<double>(as.size()) * static_cast<double>(servers_ - 1);
        break;
      case Neighborhood::Swap:
        for (std::size_t a = 0; a < as.size(); ++a) {
          for (std::size_t b = a + 1; b < as.size(); ++b) {
            if (as[a].server != as[b].server) pairs_.emplace_back(a, b);
          }
        }
        size_ = static_cast<double>(pairs_.size());
        break;
      case Neighborhood::Split:
        for (std::size_t a = 0; a < as.size(); ++a) {
          const auto n = as[a].requests.size();
          if (n < 2) continue;
          const double parts = std::ldexp(1.0, static_cast<int>(n - 1)) - 1.0;
          split_tuples_.push_back(a);
          size_ += parts * static_cast<double>(servers_ * (servers_ - 1));
          split_weights_.push_back(size_);
        }
        break;
      case Neighborhood::Merge:
        for (std::size_t a = 0; a < as.size(); ++a) {
          for (std::size_t b = a + 1; b < as.size(); ++b) {
            if (as[a].content == as[b].content && as[a].period == as[b].period) pairs_.emplace_back(a, b);
          }
        }
        size_ = static_cast<double>(pairs_.size() * servers_);
        break;
      case Neighborhood::Delay:
        for (std::size_t a = 0; a < as.size(); ++a) {
          if (as[a].period + delay_d_ < inst.horizon) delays_.push_back({a, +delay_d_});
          if (as[a].period - delay_d_ >= earliest_period(inst, as[a])) delays_.push_back({a, -delay_d_});
        }
        size_ = static_cast<double>(delays_.size());
        break;
    }
  }

  double size() const { return size_; }

  void enumerate(std::vector<Move>& out) const {
    const auto& as = sol_.assignments;
    switch (kind_) {
      case Neighborhood::Shift:
        for (std::size_t a = 0; a < as.size(); ++a) {
          for (std::size_t j = 0; j < servers_; ++j) {
            if (server_id(j) != as[a].server) out.push_back(shift(a, server_id(j)));
          }
        }
        break;
      case Neighborhood::Swap:
        for (auto [a, b] : pairs_) out.push_back(swap(a, b));
        break;
      case Neighborhood::Split:
        for (auto a : split_tuples_) {
          const auto n = as[a].requests.size();
          const std::uint64_t masks = (std::uint64_t{1} << (n - 1)) - 1;
          for (std::uint64_t m = 0; m < masks; ++m) {
            for (std::size_t jb = 0; jb < servers_; ++jb) {
              for (std::size_t jc = 0; jc < servers_; ++jc) {
                if (jb != jc) out.push_back(split(a, split_part(as[a].requests, m), server_id(jb), server_id(jc)));
              }
            }
          }
        }
        break;
      case Neighborhood::Merge:
        for (auto [a, b] : pairs_) {
          for (std::size_t j = 0; j < servers_; ++j) out.push_back(merge(a, b, server_id(j)));
        }
        break;
      case Neighborhood::Delay:
        for (auto [a, d] : delays_) out.push_back(delay(a, d));
        break;
    }
  }

  Move random(Rng& rng) const {
    const auto& as = sol_.assignments;
    switch (kind_) {
      case Neighborhood::Shift: {
        const auto a = static_cast<std::size_t>(rng.below(as.size()));
        auto j = static_cast<std::size_t>(rng.below(servers_ - 1));
        if (j >= idx(as[a].server)) ++j;
        return shift(a, server_id(j));
      }
      case Neighborhood::Swap: {
        const auto& [a, b] = pairs_[rng.below(pairs_.size())];
        return swap(a, b);
      }
      case Neighborhood::Split: {
        const double x = rng.uniform() * size_;
        const auto pos = std::upper_bound(split_weights_.begin(), split_weights_.end(), x) - split_weights_.begin();
        const auto a = split_tuples_[std::min<std::size_t>(static_cast<std::size_t>(pos), split_tuples_.size() - 1)];
        const auto& r = as[a].requests;
        std::vector<RequestId> part;
        do {
          part.assign(1, r[0]);
          for (std::size_t i = 1; i < r.size(); ++i) {
            if (rng.below(2) == 1) part.push_back(r[i]);
          }
        } while (part.size() == r.size());
        const auto jb = static_cast<std::size_t>(rng.below(servers_));
        auto jc = static_cast<std::size_t>(rng.below(servers_ - 1));
        if (jc >= jb) ++jc;
        return split(a, std::move(part), server_id(jb), server_id(jc));
      }
      case Neighborhood::Merge: {
        const auto& [a, b] = pairs_[rng.below(pairs_.size())];
        return merge(a, b, server_id(static_cast<std::size_t>(rng.below(servers_))));
      }
      case Neighborhood::Delay: {
        const auto& [a, d] = delays_[rng.below(delays_.size())];
        return delay(a, d);
      }
    }
    return {};
  }

 private:
  Move shift(std::size_t a, ServerId to) const {
    Move m;
    m.kind = MoveKind::Shift;
    m.a = a;
    m.to = to;
    m.first = sol_.assignments[a];
    return m;
  }
  Move swap(std::size_t a, std::size_t b) const {
    Move m;
    m.kind = MoveKind::Swap;
    m.a = a;
    m.b = b;
    m.first = sol_.assignments[a];
    m.second = sol_.assignments[b];
    return m;
  }
  Move split(std::size_t a, std::vector<RequestId> part, ServerId jb, ServerId jc) const {
    Move m;
    m.kind = MoveKind::Split;
    m.a = a;
    m.to = jb;
    m.to_second = jc;
    m.part = std::move(part);
    m.first = sol_.assignments[a];
    return m;
  }
  Move merge(std::size_t a, std::size_t b, ServerId to) const {
    Move m;
    m.kind = MoveKind::Merge;
    m.a = a;
    m.b = b;
    m.to = to;
    m.first = sol_.assignments[a];
    m.second = sol_.assignments[b];
    return m;
  }
  Move delay(std::size_t a, int d) const {
    Move m;
    m.kind = d > 0 ? MoveKind::DelayPlus : MoveKind::DelayMinus;
    m.a = a;
    m.delay = d;
    m.first = sol_.assignments[a];
    return m;
  }

  Neighborhood kind_;
  const Solution& sol_;
  const Instance& inst_;
  int delay_d_;
  std::size_t servers_;
  double size_ = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<std::size_t> split_tuples_;
  std::vector<double> split_weights_;
  std::vector<std::pair<std::size_t, int>> delays_;
};

}  // namespace

const char* to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::Shift: return "Shift";
    case MoveKind::Swap: return "Swap";
    case MoveKind::Split: return "Split";
    case MoveKind::Merge: return "Merge";
    case MoveKind::DelayPlus: return "DelayPlus";
    case MoveKind::DelayMinus: return "DelayMinus";
  }
  return "?";
}

const char* to_string(Neighborhood kind) {
  switch (kind) {
    case Neighborhood::Shift: return "Shift";
    case Neighborhood::Swap: return "Swap";
    case Neighborhood::Split: return "Split";
    case Neighborhood::Merge: return "Merge";
    case Neighborhood::Delay: return "Delay";
  }
  return "?";
}

Solution apply_structural(const Solution& solution, const Move& move) {
  const auto& as = solution.assignments;
  const bool pair = move.kind == MoveKind::Swap || move.kind == MoveKind::Merge;
  if (move.a >= as.size() || as[move.a] != move.first ||
      (pair && (move.b >= as.size() || move.b == move.a || as[move.b] != move.second))) {
    throw StaleMove(std::string(to_string(move.kind)) + " move does not match the solution");
  }

  Solution out = solution;
  auto& x = out.assignments[move.a];
  switch (move.kind) {
    case MoveKind::Shift:
      x.server = move.to;
      break;
    case MoveKind::Swap:
      std::swap(x.server, out.assignments[move.b].server);
      break;
    case MoveKind::Split: {
      std::vector<RequestId> rest;
      for (auto r : x.requests) {
        if (std::find(move.part.begin(), move.part.end(), r) == move.part.end()) rest.push_back(r);
      }
      if (rest.empty() || move.part.empty() || rest.size() + move.part.size() != x.requests.size()) {
        throw StaleMove("split partition does not match the tuple");
      }
      const Assignment second{x.content, move.to_second, std::move(rest), x.period};
      x.server = move.to;
      x.requests = move.part;
      out.assignments.push_back(second);
      break;
    }
    case MoveKind::Merge: {
      x.server = move.to;
      const auto& other = out.assignments[move.b].requests;
      x.requests.insert(x.requests.end(), other.begin(), other.end());
      std::sort(x.requests.begin(), x.requests.end());
      out.assignments.erase(out.assignments.begin() + static_cast<std::ptrdiff_t>(move.b));
      break;
    }
    case MoveKind::DelayPlus:
    case MoveKind::DelayMinus:
      x.period += move.delay;
      break;
  }
  return out;
}

std::vector<ScoredMove> neighborhood_moves(Neighborhood kind, const Solution& solution,
                                           Evaluator& evaluator, Rng& rng, const MoveParams& params) {
  std::vector<ScoredMove> out;
  const auto& inst = evaluator.instance();
  if (inst.servers.size() < 2 && kind != Neighborhood::Delay && kind != Neighborhood::Merge) return out;
  const auto current = evaluator.feasible_total(solution);
  if (!current) return out;

  CandidateSource source(kind, solution, inst, params.delay_d);
  if (source.size() <= 0.0) return out;

  const std::size_t cap = std::max<std::size_t>(params.sample_cap, 1);
  const std::size_t max_tests = cap * kTestsPerSample;
  auto test = [&](const Move& m) {
    Solution next = apply_structural(solution, m);
    if (const auto total = evaluator.feasible_total(next)) {
      out.push_back({m, *total - *current, *total});
    }
  };

  if (source.size() <= kEnumerateLimit) {
    std::vector<Move> all;
    source.enumerate(all);
    rng.shuffle(std::span<Move>(all));
    std::size_t tests = 0;
    for (const auto& m : all) {
      if (out.size() >= cap || tests++ >= max_tests) break;
      test(m);
    }
  } else {
    for (std::size_t tests = 0; tests < max_tests && out.size() < cap; ++tests) test(source.random(rng));
  }
  return out;
}

std::pair<Solution, double> apply_move(const Solution& solution, const Move& move,
                                       const Instance& instance) {
  Solution next = apply_structural(solution, move);
  const double delta = evaluate(instance, next).total - evaluate(instance, solution).total;
  return {std::move(next), delta};
}

}  // namespace fchp
