#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace courseforge::capsim {

// Simulation time: integer nanoseconds.
using SimTime = std::int64_t;
inline constexpr SimTime kNanosPerSecond = 1'000'000'000;

SimTime from_seconds(double seconds);
double to_seconds(SimTime t);

struct Job {
  std::string job_id;
  SimTime arrival = 0;
  SimTime service = 0;

  friend bool operator==(const Job&, const Job&) = default;
};

// Arrivals non-decreasing, service times > 0.
struct ArrivalTrace {
  std::vector<Job> jobs;

  void validate() const;
  friend bool operator==(const ArrivalTrace&, const ArrivalTrace&) = default;
};

// CSV with header `job_id,arrival_time,service_time`, times in seconds.
ArrivalTrace parse_trace_csv(std::string_view text);
std::string trace_to_csv(const ArrivalTrace& trace);

// Arrival model over the horizon [0, deadline_at]: flat intensity 1 until
// the last `ramp_fraction` of the horizon, then rising linearly to
// 1 + burst_sharpness at the deadline. Sharpness 0 is uniform. Service times
// are exponential with the given mean (clamped to >= 1 ns).
struct TraceParams {
  std::int64_t n_jobs = 500;
  double deadline_at = 3600;  // seconds
  double burst_sharpness = 8;
  double mean_service = 30;  // seconds
  std::uint64_t seed = 7;
  double ramp_fraction = 0.25;
};

ArrivalTrace gen_trace(const TraceParams& params);

}  // namespace courseforge::capsim
