#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "portwatch/errors.hpp"

namespace portwatch {

enum class Direction : uint8_t { incoming, outgoing };
enum class Protocol : uint8_t { tcp, udp, icmp, other };

inline constexpr size_t kProtocolCount = 4;

inline std::string_view to_string(Direction d) {
  return d == Direction::incoming ? "in" : "out";
}

inline std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::tcp: return "tcp";
    case Protocol::udp: return "udp";
    case Protocol::icmp: return "icmp";
    default: return "other";
  }
}

inline Direction direction_from_string(std::string_view s) {
  if (s == "in") return Direction::incoming;
  if (s == "out") return Direction::outgoing;
  throw ValidationError("unknown direction '" + std::string(s) + "' (expected \"in\" or \"out\")");
}

inline Protocol protocol_from_string(std::string_view s) {
  if (s == "tcp") return Protocol::tcp;
  if (s == "udp") return Protocol::udp;
  if (s == "icmp") return Protocol::icmp;
  if (s == "other") return Protocol::other;
  throw ValidationError("unknown protocol '" + std::string(s) + "'");
}

/// One monitored packet-count series: a port observed in one direction.
struct NodeId {
  int port = 0;
  Direction direction = Direction::incoming;

  auto operator<=>(const NodeId&) const = default;
};

inline std::string to_string(const NodeId& n) {
  return std::to_string(n.port) + "/" + std::string(to_string(n.direction));
}

/// One observed packet record. packet_count > 1 carries pre-aggregated input.
struct TrafficEvent {
  int64_t timestamp_ms = 0;
  int port = 0;
  Direction direction = Direction::incoming;
  Protocol protocol = Protocol::other;
  uint64_t packet_count = 1;
};

/// Packet count for one (port, direction) in one base-resolution time bin.
/// count always equals the sum of protocol_counts.
struct CountBin {
  int64_t bin_start_ms = 0;
  int port = 0;
  Direction direction = Direction::incoming;
  uint64_t count = 0;
  std::array<uint64_t, kProtocolCount> protocol_counts{};

  NodeId node() const { return {port, direction}; }
};

/// An event whose timestamp precedes the last closed bin. Carries the
/// event so the caller can decide between dropping and aborting.
struct LateEventError : Error {
  TrafficEvent event;

  LateEventError(TrafficEvent ev, int64_t closed_before_ms)
      : Error("late event: ts_ms=" + std::to_string(ev.timestamp_ms) +
              " precedes closed bins (< " + std::to_string(closed_before_ms) + ")"),
        event(ev) {}
};

namespace detail {

inline int64_t require_int(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (!it->is_number_integer())
    throw ParseError(std::string("field '") + key + "' must be an integer");
  return it->get<int64_t>();
}

inline std::string require_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (!it->is_string())
    throw ParseError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace detail

/// Parses one line of the event input format:
///   {"ts_ms":1000,"port":80,"dir":"in","proto":"tcp","n":3}
/// n is optional and defaults to 1; unknown keys are ignored.
inline TrafficEvent parse_event(std::string_view line) {
  nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object())
    throw ParseError("event record is not a JSON object");

  TrafficEvent ev;
  ev.timestamp_ms = detail::require_int(obj, "ts_ms");
  if (ev.timestamp_ms < 0) throw ValidationError("field 'ts_ms' must be >= 0");

  int64_t port = detail::require_int(obj, "port");
  if (port < 0 || port > 65535)
    throw ValidationError("field 'port' out of range [0, 65535]: " + std::to_string(port));
  ev.port = static_cast<int>(port);

  ev.direction = direction_from_string(detail::require_string(obj, "dir"));
  ev.protocol = protocol_from_string(detail::require_string(obj, "proto"));

  if (auto it = obj.find("n"); it != obj.end()) {
    if (!it->is_number_integer()) throw ParseError("field 'n' must be an integer");
    int64_t n = it->get<int64_t>();
    if (n < 1) throw ValidationError("field 'n' must be >= 1");
    ev.packet_count = static_cast<uint64_t>(n);
  }
  return ev;
}

/// Formats an event in the same wire format parse_event accepts.
/// n is omitted when it is the default 1.
inline std::string format_event(const TrafficEvent& ev) {
  std::string out;
  out.reserve(64);
  out += "{\"ts_ms\":";
  out += std::to_string(ev.timestamp_ms);
  out += ",\"port\":";
  out += std::to_string(ev.port);
  out += ",\"dir\":\"";
  out += to_string(ev.direction);
  out += "\",\"proto\":\"";
  out += to_string(ev.protocol);
  out += "\"";
  if (ev.packet_count != 1) {
    out += ",\"n\":";
    out += std::to_string(ev.packet_count);
  }
  out += "}";
  return out;
}

/// Accumulates timestamp-ordered events into base-resolution count bins,
/// one per (port, direction) per bin.
///
/// Once a series has produced a bin it receives explicit zero-count bins
/// for every later bin until it has been silent for expiry_bins bins, at
/// which point it leaves the active set. Bins are emitted in bin_start
/// order; within one bin start, in (port, direction) order.
class Binner {
 public:
  explicit Binner(int64_t bin_width_ms = 1000, int64_t expiry_bins = 3600)
      : bin_width_ms_(bin_width_ms), expiry_bins_(expiry_bins) {
    if (bin_width_ms < 1) throw ConfigError("bin_width_ms must be >= 1");
    if (expiry_bins < 1) throw ConfigError("expiry_bins must be >= 1");
  }

  int64_t bin_width_ms() const { return bin_width_ms_; }

  /// Returns every bin closed by accepting this event. Events within the
  /// still-open bin are accepted in any order; older ones throw LateEventError.
  std::vector<CountBin> add(const TrafficEvent& ev) {
    std::vector<CountBin> closed;
    const int64_t bin = (ev.timestamp_ms / bin_width_ms_) * bin_width_ms_;
    if (!has_open_) {
      open_bin_ = bin;
      has_open_ = true;
    } else if (bin < open_bin_) {
      throw LateEventError(ev, open_bin_);
    }
    advance_to(bin, closed);

    SeriesAcc& acc = active_[{ev.port, ev.direction}];
    acc.count += ev.packet_count;
    acc.protocol_counts[static_cast<size_t>(ev.protocol)] += ev.packet_count;
    acc.saw_event = true;
    return closed;
  }

  /// Closes the currently open bin. Further events for it become late.
  std::vector<CountBin> flush() {
    std::vector<CountBin> closed;
    if (has_open_) {
      close_open(closed);
      open_bin_ += bin_width_ms_;
    }
    return closed;
  }

  size_t active_series() const { return active_.size(); }

 private:
  struct SeriesAcc {
    uint64_t count = 0;
    std::array<uint64_t, kProtocolCount> protocol_counts{};
    int64_t silent_bins = 0;
    bool saw_event = false;
  };

  void advance_to(int64_t target_bin, std::vector<CountBin>& out) {
    while (open_bin_ < target_bin) {
      if (active_.empty()) {
        open_bin_ = target_bin;  // nothing to zero-fill across the gap
        return;
      }
      close_open(out);
      open_bin_ += bin_width_ms_;
    }
  }

  void close_open(std::vector<CountBin>& out) {
    for (auto it = active_.begin(); it != active_.end();) {
      SeriesAcc& acc = it->second;
      CountBin bin;
      bin.bin_start_ms = open_bin_;
      bin.port = it->first.first;
      bin.direction = it->first.second;
      bin.count = acc.count;
      bin.protocol_counts = acc.protocol_counts;
      out.push_back(bin);

      acc.silent_bins = acc.saw_event ? 0 : acc.silent_bins + 1;
      acc.count = 0;
      acc.protocol_counts = {};
      acc.saw_event = false;
      if (acc.silent_bins >= expiry_bins_) {
        it = active_.erase(it);
      } else {
        ++it;
      }
    }
  }

  int64_t bin_width_ms_;
  int64_t expiry_bins_;
  int64_t open_bin_ = 0;
  bool has_open_ = false;
  std::map<std::pair<int, Direction>, SeriesAcc> active_;
};

}  // namespace portwatch
