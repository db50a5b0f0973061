#include "courseforge/capsim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "courseforge/common/csv.hpp"
#include "courseforge/common/error.hpp"
#include "courseforge/common/rng.hpp"

namespace courseforge::capsim {

SimTime from_seconds(double seconds) { return std::llround(seconds * 1e9); }

double to_seconds(SimTime t) { return static_cast<double>(t) / 1e9; }

void ArrivalTrace::validate() const {
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (jobs[i].service <= 0) {
      throw user_error("trace", "job '" + jobs[i].job_id + "' has non-positive service_time");
    }
    if (jobs[i].arrival < 0) throw user_error("trace", "job '" + jobs[i].job_id + "' arrives before 0");
    if (i > 0 && jobs[i].arrival < jobs[i - 1].arrival) {
      throw user_error("trace", "arrivals not sorted at job '" + jobs[i].job_id + "'");
    }
  }
}

namespace {

double parse_number(const std::string& field, std::size_t line, const char* name) {
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(v)) {
    throw user_error("trace", "line " + std::to_string(line) + ": bad " + name + " '" + field + "'");
  }
  return v;
}

std::string format_seconds(SimTime t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%lld.%09lld", static_cast<long long>(t / kNanosPerSecond),
                static_cast<long long>(t % kNanosPerSecond));
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

ArrivalTrace parse_trace_csv(std::string_view text) {
  auto rows = csv::parse(text);
  if (rows.empty() || rows[0].fields != std::vector<std::string>{"job_id", "arrival_time", "service_time"}) {
    throw user_error("trace", "expected header 'job_id,arrival_time,service_time'");
  }
  ArrivalTrace trace;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.fields.size() != 3) {
      throw user_error("trace", "line " + std::to_string(r.line) + ": expected 3 fields");
    }
    trace.jobs.push_back({r.fields[0], from_seconds(parse_number(r.fields[1], r.line, "arrival_time")),
                          from_seconds(parse_number(r.fields[2], r.line, "service_time"))});
  }
  trace.validate();
  return trace;
}

std::string trace_to_csv(const ArrivalTrace& trace) {
  std::string out = "job_id,arrival_time,service_time\n";
  for (const auto& j : trace.jobs) {
    out += csv::join({j.job_id, format_seconds(j.arrival), format_seconds(j.service)});
    out.push_back('\n');
  }
  return out;
}

ArrivalTrace gen_trace(const TraceParams& p) {
  if (p.n_jobs < 1) throw user_error("gen", "n_jobs must be >= 1");
  if (!(p.deadline_at > 0)) throw user_error("gen", "deadline must be > 0");
  if (!(p.burst_sharpness >= 0)) throw user_error("gen", "burst_sharpness must be >= 0");
  if (!(p.mean_service > 0)) throw user_error("gen", "mean_service must be > 0");
  if (!(p.ramp_fraction > 0 && p.ramp_fraction <= 1)) throw user_error("gen", "ramp_fraction must be in (0, 1]");

  SeededRng rng(p.seed);
  const double rho = p.ramp_fraction;
  const double s = p.burst_sharpness;
  const double flat_mass = 1.0 - rho;
  const double ramp_mass = rho * (1.0 + s / 2.0);

  std::vector<std::pair<SimTime, SimTime>> draws;
  draws.reserve(static_cast<std::size_t>(p.n_jobs));
  for (std::int64_t i = 0; i < p.n_jobs; ++i) {
    // Inverse CDF of the piecewise-linear density on [0, 1].
    double m = rng.uniform() * (flat_mass + ramp_mass);
    double x;
    if (m < flat_mass) {
      x = m;
    } else {
      double r = (m - flat_mass) / rho;  // solve y + s*y^2/2 = r for y in [0, 1]
      double y = s > 0 ? (std::sqrt(1.0 + 2.0 * s * r) - 1.0) / s : r;
      x = flat_mass + rho * std::clamp(y, 0.0, 1.0);
    }
    SimTime arrival = std::min(from_seconds(x * p.deadline_at), from_seconds(p.deadline_at));
    double service = -p.mean_service * std::log1p(-rng.uniform());
    draws.emplace_back(arrival, std::max<SimTime>(1, from_seconds(service)));
  }
  std::stable_sort(draws.begin(), draws.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  ArrivalTrace trace;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    trace.jobs.push_back({"j" + std::to_string(i + 1), draws[i].first, draws[i].second});
  }
  return trace;
}

}  // namespace courseforge::capsim
