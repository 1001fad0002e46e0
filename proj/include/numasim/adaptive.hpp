#pragma once

#include <optional>
#include <span>

#include "numasim/common.hpp"

namespace numasim {

struct AdaptiveConfig {
  std::uint32_t window = 1000;   // misses per evaluation window
  double high_watermark = 0.5;   // turn on when the remote fraction exceeds this
  double low_watermark = 0.1;    // turn off when it drops below this
};

/// Per-core hysteresis controller over the miss stream. Each window of
/// `window` misses yields a remote-miss fraction; strictly above the high
/// watermark switches the bias on, strictly below the low watermark switches
/// it off, anything in between keeps the current state. The state only
/// changes at window boundaries. Initial state is off.
class BiasController {
 public:
  BiasController() = default;
  explicit BiasController(const AdaptiveConfig& cfg) : cfg_(cfg) {}

  /// Account one miss. Returns the new state if this miss closed a window
  /// and flipped the controller, otherwise nullopt.
  std::optional<bool> record_miss(bool is_remote) {
    total_ += 1;
    if (is_remote) remote_ += 1;
    if (total_ < cfg_.window) return std::nullopt;
    const double fraction = static_cast<double>(remote_) / static_cast<double>(total_);
    remote_ = 0;
    total_ = 0;
    const bool before = on_;
    if (fraction > cfg_.high_watermark)
      on_ = true;
    else if (fraction < cfg_.low_watermark)
      on_ = false;
    if (on_ != before) return on_;
    return std::nullopt;
  }

  bool bias_enabled() const { return on_; }

  const AdaptiveConfig& config() const { return cfg_; }
  std::uint32_t window_remote() const { return remote_; }
  std::uint32_t window_total() const { return total_; }

 private:
  AdaptiveConfig cfg_;
  std::uint32_t remote_ = 0;
  std::uint32_t total_ = 0;
  bool on_ = false;
};

/// Gate for a cache shared by several cores: biased iff any attached core's
/// controller is on.
inline bool shared_bias(std::span<const BiasController> controllers) {
  if (controllers.empty())
    throw Error("shared_bias: empty controller sequence");
  for (const auto& c : controllers)
    if (c.bias_enabled()) return true;
  return false;
}

}  // namespace numasim
