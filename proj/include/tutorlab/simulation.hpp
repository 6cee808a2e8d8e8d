#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "tutorlab/platform/platform.hpp"

namespace tutorlab {

// Test clock: time moves only when told to.
class ManualClock {
 public:
  explicit ManualClock(std::int64_t start_ms = 0) : now_(std::make_shared<std::atomic<std::int64_t>>(start_ms)) {}
  Clock clock() const {
    return [now = now_] { return now->load(); };
  }
  std::int64_t now() const { return now_->load(); }
  void advance(std::int64_t ms) { now_->fetch_add(ms); }

 private:
  std::shared_ptr<std::atomic<std::int64_t>> now_;
};

enum class AgentPolicy {
  // Deceptive iff the signed highlight mass is positive; coin flip when the
  // item has no signed highlights.
  highlight_follower,
  // Copies the predicted label when shown, else coin flip.
  label_follower,
  ground_truth,
  coin_flip,
};

std::string_view to_string(AgentPolicy policy);
AgentPolicy parse_agent_policy(std::string_view text);

struct SimulationOptions {
  std::size_t participants = 480;
  AgentPolicy policy = AgentPolicy::highlight_follower;
  std::uint64_t seed = 0;
  // Probability that an agent answers the definition check wrongly.
  double attention_fail_rate = 0.0;
  // Try to advance every gated training screen early, once immediately and
  // once 1 ms before the gate opens.
  bool probe_timers = true;
  std::string participant_prefix = "sim";
};

struct SimulationResult {
  std::size_t created = 0;
  std::size_t completed = 0;
  std::size_t disqualified = 0;
  std::size_t premature_attempts = 0;
  std::size_t premature_rejections = 0;
  // Set when the run stopped early because every condition was full.
  bool enrollment_closed = false;
};

// Drives `participants` agents one after another through every phase, or
// until enrollment closes. The platform must have been built with `clock`.
SimulationResult run_simulation(Platform& platform, ManualClock& clock, const SimulationOptions& options);

}  // namespace tutorlab
