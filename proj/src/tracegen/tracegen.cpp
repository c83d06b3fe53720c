#include "fchp/tracegen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "fchp/errors.hpp"

namespace fchp::trace {

void PhasePlan::validate() const {
  const std::string tag = "plan '" + content_id + "'";
  if (!(base.alpha > 0) || !(base.beta > 0)) throw DomainError(tag + ": beta shape must be positive");
  if (scale_u <= 0) throw DomainError(tag + ": scale_u must be > 0");
  if (!flash) return;
  const auto& f = *flash;
  if (!(f.ramp_up.t0 < f.ramp_up.t1) || !(f.ramp_down.t0 < f.ramp_down.t1)) {
    throw DomainError(tag + ": ramps need t0 < t1");
  }
  if (!(f.ramp_up.gamma > 0) || !(f.ramp_down.gamma > 0)) throw DomainError(tag + ": gamma must be > 0");
  if (!(f.ramp_up.t1 <= f.sustained.t_start && f.sustained.t_start <= f.sustained.t_end &&
        f.sustained.t_end <= f.ramp_down.t0)) {
    throw DomainError(tag + ": phases must be ordered ramp-up, sustained, ramp-down");
  }
}

void TraceConfig::validate() const {
  if (horizon_units <= 0) throw DomainError("horizon_units must be > 0");
  if (!(step_seconds > 0)) throw DomainError("step_seconds must be > 0");
  for (const auto& p : plans) {
    p.validate();
    if (p.flash && (p.flash->ramp_up.t0 < 0 || p.flash->ramp_down.t1 >= horizon_units)) {
      throw DomainError("plan '" + p.content_id + "': flash phases exceed the horizon");
    }
  }
}

std::pair<double, double> beta_mean_var(BetaShape s) {
  const double sum = s.alpha + s.beta;
  return {s.alpha / sum, s.alpha * s.beta / (sum * sum * (sum + 1.0))};
}

double gamma_sample(double shape, Rng& rng) {
  if (shape < 1.0) {
    const double u = rng.uniform();
    return gamma_sample(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double beta_sample(BetaShape shape, Rng& rng) {
  const double x = gamma_sample(shape.alpha, rng);
  const double y = gamma_sample(shape.beta, rng);
  if (x + y <= 0.0) return shape.alpha / (shape.alpha + shape.beta);
  return x / (x + y);
}

double ramp_weight(RampPhase phase, double t0, double t1, double gamma, double t) {
  if (!(gamma > 0)) throw DomainError("ramp gamma must be > 0");
  if (!(t0 < t1)) throw DomainError("ramp needs t0 < t1");
  if (t < t0 || t > t1) throw DomainError("ramp time outside [t0, t1]");
  const double full = std::exp(gamma * (t1 - t0));
  const double now = std::exp(gamma * (t - t0));
  if (phase == RampPhase::up) return (full - now) / (full - 1.0);
  return (now - 1.0) / (full - 1.0);
}

namespace {

BetaShape blend(BetaShape base, double y) {
  const double alpha = y * base.alpha + (1.0 - y) * base.beta;
  return {alpha, base.alpha + base.beta - alpha};
}

}  // namespace

BetaShape shape_at(const PhasePlan& plan, double t) {
  if (!plan.flash) return plan.base;
  const auto& f = *plan.flash;
  if (t < f.ramp_up.t0 || t > f.ramp_down.t1) return plan.base;
  if (t <= f.ramp_up.t1) {
    return blend(plan.base, ramp_weight(RampPhase::up, f.ramp_up.t0, f.ramp_up.t1, f.ramp_up.gamma, t));
  }
  if (t < f.ramp_down.t0) return {plan.base.beta, plan.base.alpha};
  return blend(plan.base,
               ramp_weight(RampPhase::down, f.ramp_down.t0, f.ramp_down.t1, f.ramp_down.gamma, t));
}

double mean_accesses(const PhasePlan& plan, double t) {
  return plan.scale_u * beta_mean_var(shape_at(plan, t)).first;
}

int scale_sample(double x, int scale_u) {
  const double scaled = std::floor(static_cast<double>(scale_u) * x + 0.5);
  return static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(scale_u)));
}

int accesses_at(const PhasePlan& plan, double t, Rng& rng) {
  return scale_sample(beta_sample(shape_at(plan, t), rng), plan.scale_u);
}

Trace generate_trace(const TraceConfig& config) {
  config.validate();
  const auto steps = static_cast<std::size_t>(config.horizon_units);
  const auto n = config.plans.size();
  std::vector<std::vector<int>> counts(n, std::vector<int>(steps, 0));
  for (std::size_t p = 0; p < n; ++p) {
    Rng rng(derive_seed(config.seed, p));
    for (std::size_t t = 0; t < steps; ++t) {
      counts[p][t] = accesses_at(config.plans[p], static_cast<double>(t), rng);
    }
  }
  Trace trace;
  trace.rows.reserve(steps * n);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t p = 0; p < n; ++p) {
      trace.rows.push_back({static_cast<int>(t), config.plans[p].content_id, counts[p][t]});
    }
  }
  return trace;
}

std::vector<Request> trace_to_requests(const Trace& trace, const Instance& skeleton,
                                       double step_seconds) {
  std::unordered_map<std::string, ContentId> by_name;
  for (const auto& c : skeleton.contents) by_name.emplace(c.name, c.id);

  std::vector<Request> out;
  for (const auto& row : trace.rows) {
    if (row.access_count <= 0) continue;
    auto it = by_name.find(row.content_id);
    if (it == by_name.end()) throw BrokenReference("trace names unknown content '" + row.content_id + "'");
    const int period = static_cast<int>(
        std::floor(static_cast<double>(row.time_step) * step_seconds / skeleton.period_seconds));
    if (period >= skeleton.horizon) throw DomainError("trace extends past the instance horizon");
    if (period < skeleton.content(it->second).start_period) {
      throw DomainError("trace requests '" + row.content_id + "' before it starts");
    }
    for (int n = 0; n < row.access_count; ++n) {
      out.push_back({request_id(out.size()), it->second, period});
    }
  }
  return out;
}

std::string to_csv(const Trace& trace) {
  std::ostringstream out;
  out << "time_step,content_id,access_count\n";
  for (const auto& r : trace.rows) out << r.time_step << ',' << r.content_id << ',' << r.access_count << '\n';
  return out.str();
}

Trace trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Trace trace;
  if (!std::getline(in, line) || line.rfind("time_step,content_id,access_count", 0) != 0) {
    throw ParseError("trace CSV must start with 'time_step,content_id,access_count'");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = line.rfind(',');
    if (a == std::string::npos || a == b) throw ParseError("trace CSV line " + std::to_string(lineno));
    try {
      trace.rows.push_back({std::stoi(line.substr(0, a)), line.substr(a + 1, b - a - 1),
                            std::stoi(line.substr(b + 1))});
    } catch (const std::exception&) {
      throw ParseError("trace CSV line " + std::to_string(lineno));
    }
  }
  return trace;
}

namespace {

Ramp ramp_from_json(const nlohmann::json& j) {
  Ramp r;
  r.t0 = j.at("t0").get<double>();
  r.t1 = j.at("t1").get<double>();
  // default keeps gamma * (t1 - t0) at 5
  r.gamma = j.value("gamma", r.t1 > r.t0 ? 5.0 / (r.t1 - r.t0) : 1.0);
  return r;
}

nlohmann::json ramp_to_json(const Ramp& r) { return {{"t0", r.t0}, {"t1", r.t1}, {"gamma", r.gamma}}; }

}  // namespace

TraceConfig config_from_json(const nlohmann::json& j) {
  try {
    TraceConfig cfg;
    cfg.horizon_units = j.at("horizon_units").get<int>();
    cfg.step_seconds = j.value("step_seconds", 1.0);
    cfg.seed = j.value("seed", std::uint64_t{0});
    for (const auto& p : j.at("plans")) {
      PhasePlan plan;
      plan.content_id = p.at("content_id").get<std::string>();
      plan.scale_u = p.value("scale_u", 10);
      if (p.contains("base")) {
        plan.base = {p.at("base").at("alpha").get<double>(), p.at("base").at("beta").get<double>()};
      }
      if (p.contains("flash") && !p.at("flash").is_null()) {
        const auto& f = p.at("flash");
        plan.flash = FlashPhases{ramp_from_json(f.at("ramp_up")),
                                 {f.at("sustained").at("t_start").get<double>(),
                                  f.at("sustained").at("t_end").get<double>()},
                                 ramp_from_json(f.at("ramp_down"))};
      }
      cfg.plans.push_back(std::move(plan));
    }
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed trace config: ") + e.what());
  }
}

nlohmann::json to_json(const TraceConfig& cfg) {
  nlohmann::json plans = nlohmann::json::array();
  for (const auto& p : cfg.plans) {
    nlohmann::json jp = {{"content_id", p.content_id},
                         {"scale_u", p.scale_u},
                         {"base", {{"alpha", p.base.alpha}, {"beta", p.base.beta}}}};
    if (p.flash) {
      jp["flash"] = {{"ramp_up", ramp_to_json(p.flash->ramp_up)},
                     {"sustained", {{"t_start", p.flash->sustained.t_start}, {"t_end", p.flash->sustained.t_end}}},
                     {"ramp_down", ramp_to_json(p.flash->ramp_down)}};
    }
    plans.push_back(std::move(jp));
  }
  return {{"horizon_units", cfg.horizon_units}, {"step_seconds", cfg.step_seconds}, {"seed", cfg.seed}, {"plans", plans}};
}

}  // namespace fchp::trace
