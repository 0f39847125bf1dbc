#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lumiswarm/model.hpp"

namespace lumiswarm {

enum class EventKind { Round, Look, ComputeEnd, MoveStart, MoveEnd, Light, Terminate, Violation };

std::string_view toString(EventKind k);
EventKind eventKindFromString(std::string_view s);

struct TraceEvent {
  double t = 0.0;
  EventKind kind = EventKind::Round;
  int robot = -1;
  Point2 pos;
  Light light = Light::None;
  FrameSpec frame;
  double realizedFraction = 1.0;
  Point2 dest;
  double tEnd = 0.0;
  std::string note;
  std::vector<int> robots;  // violation only
};

nlohmann::json toJson(const TraceEvent& e);
// Throws TraceInvalid.
TraceEvent eventFromJson(const nlohmann::json& j);

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 1469598103934665603ULL);
std::string hex64(std::uint64_t v);

inline constexpr const char* kTraceFormat = "lumiswarm-trace";
inline constexpr int kTraceVersion = 1;

// JSON-lines trace: header, events, footer. The footer carries an FNV-1a
// checksum over every preceding line (newline included).
class TraceLog {
 public:
  void setHeader(const nlohmann::json& header);
  void add(const TraceEvent& e);
  void setFooter(nlohmann::json footer);
  const std::vector<std::string>& lines() const { return lines_; }
  const std::vector<TraceEvent>& events() const { return events_; }
  std::string text() const;
  bool hasFooter() const { return footer_; }
  // Copy with a provisional footer, for exporting a run that is still open.
  TraceLog withFooter(nlohmann::json footer) const;

 private:
  std::vector<std::string> lines_;
  std::vector<TraceEvent> events_;
  std::uint64_t running_ = 1469598103934665603ULL;
  bool footer_ = false;
};

struct ParsedTrace {
  nlohmann::json header;
  std::vector<TraceEvent> events;
  nlohmann::json footer;
  bool checksumOk = false;
};

// Throws TraceInvalid on malformed input.
ParsedTrace parseTrace(std::string_view text);

}  // namespace lumiswarm
