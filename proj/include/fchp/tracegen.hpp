#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fchp/instance.hpp"
#include "fchp/rng.hpp"

namespace fchp::trace {

struct BetaShape {
  double alpha = 1.0;
  double beta = 1.0;
};

struct Ramp {
  double t0 = 0.0;
  double t1 = 1.0;
  double gamma = 1.0;
};

struct Sustained {
  double t_start = 0.0;
  double t_end = 0.0;
};

struct FlashPhases {
  Ramp ramp_up;
  Sustained sustained;
  Ramp ramp_down;
};

/// Access-count model for one content. Without `flash` the content keeps
/// its base shape over the whole horizon.
struct PhasePlan {
  std::string content_id;
  BetaShape base{2.0, 20.0};
  std::optional<FlashPhases> flash;
  int scale_u = 10;

  void validate() const;
};

struct TraceConfig {
  std::vector<PhasePlan> plans;
  int horizon_units = 0;
  double step_seconds = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceRow {
  int time_step = 0;
  std::string content_id;
  int access_count = 0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct Trace {
  std::vector<TraceRow> rows;
};

enum class RampPhase { up, down };

/// (mean, variance) of Beta(alpha, beta).
std::pair<double, double> beta_mean_var(BetaShape shape);

/// Gamma(shape, 1) by Marsaglia-Tsang, boosted for shape < 1.
double gamma_sample(double shape, Rng& rng);

/// X / (X + Y) with X ~ Gamma(alpha), Y ~ Gamma(beta).
double beta_sample(BetaShape shape, Rng& rng);

/// Interpolation weight y_t on [t0, t1]. Up: 1 -> 0 with 1 - y_t growing
/// exponentially. Down: 0 -> 1 with y_t growing exponentially.
/// Throws DomainError outside [t0, t1] or for gamma <= 0.
double ramp_weight(RampPhase phase, double t0, double t1, double gamma, double t);

/// Shape at time t: base outside the flash, the swapped shape at the peak,
/// and the convex blend alpha_t = y*alpha0 + (1-y)*beta0 within the ramps.
BetaShape shape_at(const PhasePlan& plan, double t);

/// Expected U * alpha_t / (alpha_t + beta_t).
double mean_accesses(const PhasePlan& plan, double t);

/// round-half-up(U * x) clamped to [0, U].
int scale_sample(double x, int scale_u);

int accesses_at(const PhasePlan& plan, double t, Rng& rng);

/// One row per (time step, plan), sorted by time step then plan order.
/// Plan p draws from its own stream derive_seed(seed, p).
Trace generate_trace(const TraceConfig& config);

/// Expands rows into requests against `skeleton`'s contents (matched by
/// name); arrival = floor(time_step * step_seconds / period_seconds).
std::vector<Request> trace_to_requests(const Trace& trace, const Instance& skeleton,
                                       double step_seconds);

std::string to_csv(const Trace& trace);
Trace trace_from_csv(const std::string& text);

TraceConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TraceConfig& config);

}  // namespace fchp::trace
