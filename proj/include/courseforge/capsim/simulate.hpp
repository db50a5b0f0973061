#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "courseforge/capsim/trace.hpp"

namespace courseforge::capsim {

// Shared grading server with a fixed number of workers.
struct FixedPool {
  int workers = 1;
};

// One fresh single-use instance per job, ready `provision_latency` after it is
// requested. At most `max_instances` exist at once (provisioning or running);
// nullopt means unbounded.
struct Elastic {
  SimTime provision_latency = 0;
  std::optional<int> max_instances;
};

using Policy = std::variant<FixedPool, Elastic>;

// "fixed:<workers>", "elastic:<latency_s>[:<max>|:unbounded]"
Policy parse_policy(std::string_view text);
std::string describe(const Policy& policy);
void validate(const Policy& policy);

struct JobRecord {
  std::string job_id;
  SimTime arrival = 0;
  SimTime start = 0;
  SimTime completion = 0;
  SimTime wait() const { return start - arrival; }
};

struct SimMetrics {
  std::vector<JobRecord> jobs;  // trace order
  double mean_wait = 0;  // seconds
  double p95_wait = 0;   // seconds, nearest rank
  double max_wait = 0;   // seconds
  std::size_t max_queue_depth = 0;
  // (time, jobs waiting for a worker or instance slot) at every change.
  std::vector<std::pair<SimTime, std::size_t>> queue_depth_timeline;
  // Jobs in the order they started service.
  std::vector<std::size_t> start_order;
};

// Deterministic event-driven FIFO simulation. At equal timestamps
// completions are handled before arrivals, so a freed worker is visible to a
// job arriving at the same instant.
SimMetrics simulate(const ArrivalTrace& trace, const Policy& policy);

struct PolicyRow {
  std::string policy;
  SimMetrics metrics;
};

std::vector<PolicyRow> compare_policies(const ArrivalTrace& trace, const std::vector<Policy>& policies);

std::string report_csv(const std::vector<PolicyRow>& rows);
std::string report_table(const std::vector<PolicyRow>& rows);

}  // namespace courseforge::capsim
