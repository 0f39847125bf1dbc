#include "lumiswarm/trace.hpp"

#include <cstdio>
#include <sstream>

#include "lumiswarm/error.hpp"

namespace lumiswarm {

using nlohmann::json;

std::string_view toString(EventKind k) {
  switch (k) {
    case EventKind::Round: return "round";
    case EventKind::Look: return "look";
    case EventKind::ComputeEnd: return "computeEnd";
    case EventKind::MoveStart: return "moveStart";
    case EventKind::MoveEnd: return "moveEnd";
    case EventKind::Light: return "light";
    case EventKind::Terminate: return "terminate";
    case EventKind::Violation: return "violation";
  }
  return "round";
}

EventKind eventKindFromString(std::string_view s) {
  for (EventKind k : {EventKind::Round, EventKind::Look, EventKind::ComputeEnd, EventKind::MoveStart, EventKind::MoveEnd,
                      EventKind::Light, EventKind::Terminate, EventKind::Violation})
    if (toString(k) == s) return k;
  throw Error(ErrorCode::TraceInvalid, "unknown event kind '" + std::string(s) + "'");
}

namespace {

json point(Point2 p) { return json::array({p.x, p.y}); }

Point2 readPoint(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::TraceInvalid, "point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json toJson(const TraceEvent& e) {
  json j;
  j["t"] = e.t;
  j["kind"] = toString(e.kind);
  if (e.kind == EventKind::Round) return j;
  if (e.robot >= 0) j["robot"] = e.robot;
  switch (e.kind) {
    case EventKind::Look:
      j["pos"] = point(e.pos);
      j["frame"] = {{"rotation", e.frame.rotation}, {"reflect", e.frame.reflect}, {"scale", e.frame.scale}};
      break;
    case EventKind::ComputeEnd:
      j["light"] = toString(e.light);
      j["dest"] = point(e.dest);
      break;
    case EventKind::MoveStart:
      j["pos"] = point(e.pos);
      j["dest"] = point(e.dest);
      j["tEnd"] = e.tEnd;
      j["realizedFraction"] = e.realizedFraction;
      break;
    case EventKind::MoveEnd:
      j["pos"] = point(e.pos);
      break;
    case EventKind::Light:
      j["light"] = toString(e.light);
      break;
    case EventKind::Violation:
      j["note"] = e.note;
      j["robots"] = e.robots;
      break;
    default:
      break;
  }
  return j;
}

TraceEvent eventFromJson(const json& j) {
  try {
    TraceEvent e;
    e.t = j.at("t").get<double>();
    e.kind = eventKindFromString(j.at("kind").get<std::string>());
    if (j.contains("robot")) e.robot = j["robot"].get<int>();
    if (j.contains("pos")) e.pos = readPoint(j["pos"]);
    if (j.contains("dest")) e.dest = readPoint(j["dest"]);
    if (j.contains("light")) e.light = lightFromString(j["light"].get<std::string>());
    if (j.contains("tEnd")) e.tEnd = j["tEnd"].get<double>();
    if (j.contains("realizedFraction")) e.realizedFraction = j["realizedFraction"].get<double>();
    if (j.contains("note")) e.note = j["note"].get<std::string>();
    if (j.contains("robots")) e.robots = j["robots"].get<std::vector<int>>();
    if (j.contains("frame")) {
      const json& f = j["frame"];
      e.frame = {f.at("rotation").get<double>(), f.at("reflect").get<bool>(), f.at("scale").get<double>()};
    }
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::TraceInvalid, ex.what());
  } catch (const Error& ex) {
    throw Error(ErrorCode::TraceInvalid, ex.what());
  }
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void TraceLog::setHeader(const json& header) {
  lines_.insert(lines_.begin(), header.dump());
  running_ = 1469598103934665603ULL;
  for (const auto& l : lines_) running_ = fnv1a(l + "\n", running_);
}

void TraceLog::add(const TraceEvent& e) {
  events_.push_back(e);
  lines_.push_back(toJson(e).dump());
  running_ = fnv1a(lines_.back() + "\n", running_);
}

void TraceLog::setFooter(json footer) {
  footer["checksum"] = hex64(running_);
  lines_.push_back(footer.dump());
  footer_ = true;
}

TraceLog TraceLog::withFooter(json footer) const {
  TraceLog copy = *this;
  copy.setFooter(std::move(footer));
  return copy;
}

std::string TraceLog::text() const {
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

ParsedTrace parseTrace(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(line);
  if (lines.size() < 2) throw Error(ErrorCode::TraceInvalid, "trace needs a header and a footer");
  ParsedTrace out;
  try {
    out.header = json::parse(lines.front());
    out.footer = json::parse(lines.back());
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::TraceInvalid, ex.what());
  }
  if (out.header.value("format", "") != kTraceFormat) throw Error(ErrorCode::TraceInvalid, "not a lumiswarm trace");
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    h = fnv1a(lines[i] + "\n", h);
    if (i == 0) continue;
    try {
      out.events.push_back(eventFromJson(json::parse(lines[i])));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::TraceInvalid, ex.what());
    }
  }
  out.checksumOk = out.footer.value("checksum", "") == hex64(h);
  return out;
}

}  // namespace lumiswarm
