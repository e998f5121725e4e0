#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "portwatch/errors.hpp"
#include "portwatch/ingest.hpp"

namespace portwatch {

enum class ScaleName : uint8_t { base, second, minute, hour, day, month };

inline std::string_view to_string(ScaleName s) {
  switch (s) {
    case ScaleName::base: return "base";
    case ScaleName::second: return "second";
    case ScaleName::minute: return "minute";
    case ScaleName::hour: return "hour";
    case ScaleName::day: return "day";
    default: return "month";
  }
}

inline ScaleName scale_from_string(std::string_view s) {
  if (s == "base") return ScaleName::base;
  if (s == "second") return ScaleName::second;
  if (s == "minute") return ScaleName::minute;
  if (s == "hour") return ScaleName::hour;
  if (s == "day") return ScaleName::day;
  if (s == "month") return ScaleName::month;
  throw ValidationError("unknown scale '" + std::string(s) + "'");
}

/// One rung of the aggregation ladder. Every non-base scale is computed
/// from exactly children_per_window windows of the immediately finer scale.
struct TimeScale {
  ScaleName name = ScaleName::base;
  uint32_t children_per_window = 1;

  bool operator==(const TimeScale&) const = default;
};

/// Mean/variance/min/max/count aggregate over one window of one series.
/// mean is the arithmetic mean of the child values (packet counts at the
/// base scale, child means above it); variance is the population variance
/// of the same values; min_value/max_value are their exact extrema.
struct WindowStat {
  TimeScale scale;
  int64_t window_start_ms = 0;
  int port = 0;
  Direction direction = Direction::incoming;
  double mean = 0.0;
  double variance = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  uint32_t sample_count = 0;

  NodeId node() const { return {port, direction}; }
  bool complete() const { return sample_count >= scale.children_per_window; }
};

/// Arithmetic mean (n_1 + ... + n_t) / t of the child values.
inline double window_mean(std::span<const double> child_values) {
  if (child_values.empty()) throw EmptyWindowError("window_mean over empty child list");
  double sum = 0.0;
  for (double v : child_values) sum += v;
  return sum / static_cast<double>(child_values.size());
}

/// Full window aggregate over a non-empty child list. The mean is clamped
/// into [min, max] so floating-point summation drift cannot break the
/// min <= mean <= max invariant.
inline WindowStat window_stat(const TimeScale& scale, int64_t window_start_ms, int port,
                              Direction direction, std::span<const double> child_values) {
  if (child_values.empty()) throw EmptyWindowError("window_stat over empty child list");
  if (child_values.size() > scale.children_per_window)
    throw LadderError("window at scale '" + std::string(to_string(scale.name)) + "' holds " +
                      std::to_string(child_values.size()) + " children, limit " +
                      std::to_string(scale.children_per_window));

  WindowStat st;
  st.scale = scale;
  st.window_start_ms = window_start_ms;
  st.port = port;
  st.direction = direction;
  st.sample_count = static_cast<uint32_t>(child_values.size());

  double mn = child_values[0], mx = child_values[0];
  for (double v : child_values) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  st.min_value = mn;
  st.max_value = mx;

  double mean = window_mean(child_values);
  st.mean = std::clamp(mean, mn, mx);

  double acc = 0.0;
  for (double v : child_values) {
    const double d = v - st.mean;
    acc += d * d;
  }
  st.variance = acc / static_cast<double>(child_values.size());
  return st;
}

/// A base-resolution bin viewed as a degenerate single-sample window, the
/// form in which raw counts enter the ladder.
inline WindowStat window_stat_from_bin(const CountBin& bin) {
  WindowStat st;
  st.scale = TimeScale{ScaleName::base, 1};
  st.window_start_ms = bin.bin_start_ms;
  st.port = bin.port;
  st.direction = bin.direction;
  st.mean = static_cast<double>(bin.count);
  st.variance = 0.0;
  st.min_value = st.mean;
  st.max_value = st.mean;
  st.sample_count = 1;
  return st;
}

/// The ordered scale ladder. Index 0 is the base scale (one bin per
/// window); each later scale is fed exclusively by the one before it, so
/// skipping a level is impossible through this interface.
class Ladder {
 public:
  Ladder(int64_t bin_width_ms, std::vector<TimeScale> aggregated) {
    if (bin_width_ms < 1) throw ConfigError("bin_width_ms must be >= 1");
    if (aggregated.empty()) throw ConfigError("ladder needs at least one aggregated scale");
    scales_.push_back(TimeScale{ScaleName::base, 1});
    window_ms_.push_back(bin_width_ms);
    for (const TimeScale& s : aggregated) {
      if (s.name == ScaleName::base) throw ConfigError("ladder may not re-declare the base scale");
      if (s.children_per_window < 1)
        throw ConfigError("children_per_window must be >= 1");
      for (const TimeScale& seen : scales_)
        if (seen.name == s.name)
          throw ConfigError("duplicate scale '" + std::string(to_string(s.name)) + "' in ladder");
      scales_.push_back(s);
      window_ms_.push_back(window_ms_.back() * s.children_per_window);
    }
  }

  /// base(1 s bins) -> minute(60) -> hour(60) -> day(24) -> month(30 days).
  static Ladder standard(int64_t bin_width_ms = 1000) {
    return Ladder(bin_width_ms, {{ScaleName::minute, 60},
                                 {ScaleName::hour, 60},
                                 {ScaleName::day, 24},
                                 {ScaleName::month, 30}});
  }

  size_t size() const { return scales_.size(); }
  const TimeScale& scale(size_t level) const { return scales_.at(level); }
  int64_t window_ms(size_t level) const { return window_ms_.at(level); }
  int64_t finest_aggregated_window_ms() const { return window_ms_.at(1); }

  size_t level_of(ScaleName name) const {
    for (size_t i = 0; i < scales_.size(); ++i)
      if (scales_[i].name == name) return i;
    throw LadderError("scale '" + std::string(to_string(name)) + "' is not in the ladder");
  }

  int64_t window_start(size_t level, int64_t ts_ms) const {
    const int64_t w = window_ms_.at(level);
    return (ts_ms / w) * w;
  }

  /// Groups finer-scale stats into target-scale windows and aggregates each
  /// group's means. Groups are emitted once complete; an incomplete group is
  /// emitted (flagged by its sample_count) only when a later window begins
  /// or, for the trailing group, when flush is set.
  std::vector<WindowStat> rollup_next(std::span<const WindowStat> finer, ScaleName target,
                                      bool flush = false) const {
    const size_t level = level_of(target);
    if (level == 0) throw LadderError("cannot roll up into the base scale");
    const TimeScale& parent = scales_[level - 1];
    const TimeScale& scale = scales_[level];
    const int64_t wms = window_ms_[level];

    std::vector<WindowStat> out;
    std::vector<double> children;
    std::optional<int64_t> open;
    int port = 0;
    Direction direction = Direction::incoming;
    int64_t last_child_ws = 0;

    auto close = [&]() {
      out.push_back(window_stat(scale, *open, port, direction, children));
      children.clear();
      open.reset();
    };

    for (const WindowStat& st : finer) {
      if (st.scale != parent)
        throw LadderError("rollup into '" + std::string(to_string(target)) +
                          "' requires stats at its parent scale '" +
                          std::string(to_string(parent.name)) + "'");
      if (!open) {
        port = st.port;
        direction = st.direction;
      } else if (st.port != port || st.direction != direction) {
        throw LadderError("mixed series in rollup input");
      }
      if (open && st.window_start_ms < last_child_ws)
        throw LadderError("rollup input not ordered by window start");
      last_child_ws = st.window_start_ms;

      const int64_t w = (st.window_start_ms / wms) * wms;
      if (open && w != *open) close();
      if (!open) open = w;
      children.push_back(st.mean);
      if (children.size() == scale.children_per_window) close();
    }
    if (flush && open) close();
    return out;
  }

 private:
  std::vector<TimeScale> scales_;
  std::vector<int64_t> window_ms_;
};

/// Streaming rollup state for one (port, direction) series: base stats go
/// in, completed higher-scale stats come out, each scale fed only by the
/// means of the scale below it.
class LadderPipeline {
 public:
  LadderPipeline(const Ladder* ladder, int port, Direction direction)
      : ladder_(ladder), port_(port), direction_(direction), levels_(ladder->size() - 1) {}

  /// Feeds one base-scale stat; returns every window it closes, finest
  /// first. Only complete windows propagate upward.
  std::vector<WindowStat> push(const WindowStat& base_stat) {
    if (base_stat.scale.name != ScaleName::base || base_stat.port != port_ ||
        base_stat.direction != direction_)
      throw IdentityError("pipeline fed a stat from another series or scale");
    std::vector<WindowStat> out;
    push_level(0, base_stat.window_start_ms, base_stat.mean, out);
    return out;
  }

  /// Emits the incomplete trailing window at every level, flagged partial
  /// via sample_count. Partial windows do not propagate upward.
  std::vector<WindowStat> flush() {
    std::vector<WindowStat> out;
    for (size_t i = 0; i < levels_.size(); ++i)
      if (levels_[i].open) close_level(i, out, false);
    return out;
  }

 private:
  struct Level {
    std::optional<int64_t> open;
    std::vector<double> children;
  };

  void push_level(size_t level, int64_t child_ws, double value, std::vector<WindowStat>& out) {
    if (level >= levels_.size()) return;
    Level& st = levels_[level];
    const int64_t w = ladder_->window_start(level + 1, child_ws);
    if (st.open && *st.open != w) close_level(level, out, true);
    if (!st.open) st.open = w;
    st.children.push_back(value);
    if (st.children.size() == ladder_->scale(level + 1).children_per_window)
      close_level(level, out, true);
  }

  void close_level(size_t level, std::vector<WindowStat>& out, bool propagate) {
    Level& st = levels_[level];
    WindowStat stat =
        window_stat(ladder_->scale(level + 1), *st.open, port_, direction_, st.children);
    st.open.reset();
    st.children.clear();
    out.push_back(stat);
    if (propagate && stat.complete())
      push_level(level + 1, stat.window_start_ms, stat.mean, out);
  }

  const Ladder* ladder_;
  int port_;
  Direction direction_;
  std::vector<Level> levels_;
};

}  // namespace portwatch
