#include "courseforge/capsim/simulate.hpp"

#include <cstdio>
#include <cstdlib>
#include <deque>
#include <queue>
#include <tuple>

#include "courseforge/common/error.hpp"
#include "courseforge/common/stats.hpp"

namespace courseforge::capsim {

namespace {

int parse_positive_int(std::string_view s, const char* what) {
  std::string str(s);
  char* end = nullptr;
  long v = std::strtol(str.c_str(), &end, 10);
  if (str.empty() || end != str.c_str() + str.size() || v < 1 || v > 1'000'000) {
    throw user_error("policy", std::string("bad ") + what + " '" + str + "'");
  }
  return static_cast<int>(v);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

enum class EventType { kCompletion = 0, kArrival = 1 };

struct Event {
  SimTime time;
  EventType type;
  std::size_t seq;  // tie-break: insertion order
  std::size_t job;

  bool operator>(const Event& o) const {
    return std::tie(time, type, seq) > std::tie(o.time, o.type, o.seq);
  }
};

}  // namespace

Policy parse_policy(std::string_view text) {
  auto parts = split(text, ':');
  if (parts[0] == "fixed" && parts.size() == 2) return FixedPool{parse_positive_int(parts[1], "worker count")};
  if (parts[0] == "elastic" && (parts.size() == 2 || parts.size() == 3)) {
    std::string latency(parts[1]);
    char* end = nullptr;
    double seconds = std::strtod(latency.c_str(), &end);
    if (latency.empty() || end != latency.c_str() + latency.size() || !(seconds >= 0)) {
      throw user_error("policy", "bad provision latency '" + latency + "'");
    }
    Elastic e{from_seconds(seconds), std::nullopt};
    if (parts.size() == 3 && parts[2] != "unbounded") e.max_instances = parse_positive_int(parts[2], "max instances");
    return e;
  }
  throw user_error("policy", "unknown policy '" + std::string(text) +
                                 "' (expected fixed:<k> or elastic:<latency>[:<max>|:unbounded])");
}

std::string describe(const Policy& policy) {
  if (const auto* f = std::get_if<FixedPool>(&policy)) return "fixed:" + std::to_string(f->workers);
  const auto& e = std::get<Elastic>(policy);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", to_seconds(e.provision_latency));
  return std::string("elastic:") + buf + ":" + (e.max_instances ? std::to_string(*e.max_instances) : "unbounded");
}

void validate(const Policy& policy) {
  if (const auto* f = std::get_if<FixedPool>(&policy)) {
    if (f->workers < 1) throw user_error("policy", "workers must be >= 1");
    return;
  }
  const auto& e = std::get<Elastic>(policy);
  if (e.provision_latency < 0) throw user_error("policy", "provision latency must be >= 0");
  if (e.max_instances && *e.max_instances < 1) throw user_error("policy", "max_instances must be >= 1");
}

SimMetrics simulate(const ArrivalTrace& trace, const Policy& policy) {
  trace.validate();
  validate(policy);

  // A fixed pool is a bounded set of reusable workers with no start-up
  // delay; elastic capacity is a bound on concurrently existing instances,
  // each paying the provisioning latency. Both free one slot per completion.
  std::optional<std::size_t> capacity;
  SimTime startup = 0;
  if (const auto* f = std::get_if<FixedPool>(&policy)) {
    capacity = static_cast<std::size_t>(f->workers);
  } else {
    const auto& e = std::get<Elastic>(policy);
    startup = e.provision_latency;
    if (e.max_instances) capacity = static_cast<std::size_t>(*e.max_instances);
  }

  SimMetrics m;
  m.jobs.resize(trace.jobs.size());
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  std::size_t seq = 0;
  for (std::size_t i = 0; i < trace.jobs.size(); ++i) {
    m.jobs[i].job_id = trace.jobs[i].job_id;
    m.jobs[i].arrival = trace.jobs[i].arrival;
    events.push({trace.jobs[i].arrival, EventType::kArrival, seq++, i});
  }

  std::deque<std::size_t> waiting;
  std::size_t busy = 0;
  auto record_depth = [&](SimTime now) {
    auto depth = waiting.size();
    m.max_queue_depth = std::max(m.max_queue_depth, depth);
    auto& tl = m.queue_depth_timeline;
    if (!tl.empty() && tl.back().first == now) {
      tl.back().second = depth;
      if (tl.size() >= 2 && tl[tl.size() - 2].second == depth) tl.pop_back();
    } else if (tl.empty() ? depth != 0 : tl.back().second != depth) {
      tl.emplace_back(now, depth);
    }
  };

  while (!events.empty()) {
    Event ev = events.top();
    events.pop();
    if (ev.type == EventType::kArrival) {
      waiting.push_back(ev.job);
    } else {
      --busy;
    }
    while (!waiting.empty() && (!capacity || busy < *capacity)) {
      std::size_t j = waiting.front();
      waiting.pop_front();
      ++busy;
      m.jobs[j].start = ev.time + startup;
      m.jobs[j].completion = m.jobs[j].start + trace.jobs[j].service;
      m.start_order.push_back(j);
      events.push({m.jobs[j].completion, EventType::kCompletion, seq++, j});
    }
    record_depth(ev.time);
  }

  std::vector<SimTime> waits;
  waits.reserve(m.jobs.size());
  for (const auto& j : m.jobs) waits.push_back(j.wait());
  m.mean_wait = mean_of(waits) / 1e9;
  m.p95_wait = to_seconds(percentile_nearest_rank(waits, 95));
  m.max_wait = waits.empty() ? 0 : to_seconds(*std::max_element(waits.begin(), waits.end()));
  return m;
}

std::vector<PolicyRow> compare_policies(const ArrivalTrace& trace, const std::vector<Policy>& policies) {
  if (policies.empty()) throw user_error("policy", "at least one policy is required");
  std::vector<PolicyRow> rows;
  for (const auto& p : policies) rows.push_back({describe(p), simulate(trace, p)});
  return rows;
}

std::string report_csv(const std::vector<PolicyRow>& rows) {
  std::string out = "policy,jobs,mean_wait,p95_wait,max_wait,max_queue_depth\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.6f,%zu\n", r.policy.c_str(), r.metrics.jobs.size(),
                  r.metrics.mean_wait, r.metrics.p95_wait, r.metrics.max_wait, r.metrics.max_queue_depth);
    out += buf;
  }
  return out;
}

std::string report_table(const std::vector<PolicyRow>& rows) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %8s %12s %12s %12s %10s\n", "policy", "jobs", "mean_wait_s",
                "p95_wait_s", "max_wait_s", "max_queue");
  std::string out = buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-24s %8zu %12.3f %12.3f %12.3f %10zu\n", r.policy.c_str(),
                  r.metrics.jobs.size(), r.metrics.mean_wait, r.metrics.p95_wait, r.metrics.max_wait,
                  r.metrics.max_queue_depth);
    out += buf;
  }
  return out;
}

}  // namespace courseforge::capsim
