#include "reefsim/fleetlink/messages.hpp"

#include <cmath>

#include "json.hpp"

namespace reefsim::fleetlink {

using json = nlohmann::ordered_json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::Decode, what); }

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) throw Error(Errc::Encoding, std::string("non-finite ") + field);
}

std::string_view mission_mode_name(guidance::MissionMode m) {
  switch (m) {
    case guidance::MissionMode::Transect: return "transect";
    case guidance::MissionMode::Coverage: return "coverage";
    case guidance::MissionMode::Station: return "station";
  }
  return "transect";
}

guidance::MissionMode mission_mode_from(const std::string& s) {
  if (s == "transect") return guidance::MissionMode::Transect;
  if (s == "coverage") return guidance::MissionMode::Coverage;
  if (s == "station") return guidance::MissionMode::Station;
  bad("unknown mission mode '" + s + "'");
}

// --- encoding -------------------------------------------------------------

json encode(const TelemetryMessage& m) {
  if (m.vehicle_id.empty()) throw Error(Errc::Encoding, "empty vehicle_id");
  for (double v : {m.timestamp, m.pose.x, m.pose.y, m.pose.heading, m.battery, m.gauge})
    require_finite(v, "telemetry field");
  json j;
  j["vehicle_id"] = m.vehicle_id;
  j["sequence"] = m.sequence;
  j["timestamp"] = m.timestamp;
  j["pose"] = {{"x", m.pose.x}, {"y", m.pose.y}, {"heading", m.pose.heading}};
  j["battery"] = m.battery;
  j["gauge"] = m.gauge;
  if (m.last_decision) {
    require_finite(m.last_decision->position.x, "decision x");
    require_finite(m.last_decision->position.y, "decision y");
    j["last_decision"] = {{"x", m.last_decision->position.x},
                          {"y", m.last_decision->position.y},
                          {"predicted", reefworld::to_string(m.last_decision->predicted)}};
  } else {
    j["last_decision"] = nullptr;
  }
  j["progress"] = {{"waypoint", m.waypoint_index}, {"complete", m.mission_complete}};
  return j;
}

json encode_payload(const vehicle::PayloadConfig& p) {
  try {
    vehicle::validate(p);
  } catch (const Error& e) {
    throw Error(Errc::Encoding, e.what());
  }
  return std::visit(overloaded{
                        [](const vehicle::Collection&) { return json{{"kind", "collection"}}; },
                        [](const vehicle::Dispersal& d) {
                          return json{{"kind", "dispersal"}, {"bladder_capacity_l", d.bladder_capacity_l}};
                        },
                        [](const vehicle::Monitoring& m) {
                          return json{{"kind", "monitoring"}, {"camera_footprint_m", m.camera_footprint_m}};
                        },
                    },
                    p);
}

json encode(const CommandMessage& m) {
  if (m.vehicle_id.empty()) throw Error(Errc::Encoding, "empty vehicle_id");
  json j;
  j["vehicle_id"] = m.vehicle_id;
  std::visit(overloaded{
                 [&](const UploadMission& c) {
                   try {
                     c.mission.validate();
                   } catch (const Error& e) {
                     throw Error(Errc::Encoding, e.what());
                   }
                   json wps = json::array();
                   for (const Vec2 w : c.mission.waypoints) {
                     require_finite(w.x, "waypoint");
                     require_finite(w.y, "waypoint");
                     wps.push_back(json::array({w.x, w.y}));
                   }
                   require_finite(c.mission.arrival_radius, "arrival_radius");
                   j["command"] = "upload_mission";
                   j["mission"] = {{"waypoints", wps},
                                   {"arrival_radius", c.mission.arrival_radius},
                                   {"mode", mission_mode_name(c.mission.mode)}};
                 },
                 [&](const SetPayload& c) {
                   j["command"] = "set_payload";
                   j["payload"] = encode_payload(c.payload);
                 },
                 [&](const SetDispersalMode& c) {
                   j["command"] = "set_dispersal_mode";
                   j["mode"] = dispersal::to_string(c.mode);
                 },
                 [&](const Start&) { j["command"] = "start"; },
                 [&](const Stop&) { j["command"] = "stop"; },
                 [&](const ReturnHome&) { j["command"] = "return_home"; },
             },
             m.command);
  return j;
}

json encode(const CommandReply& m) {
  if (m.vehicle_id.empty()) throw Error(Errc::Encoding, "empty vehicle_id");
  json j;
  j["vehicle_id"] = m.vehicle_id;
  j["accepted"] = m.accepted;
  j["reason"] = m.reason;
  return j;
}

MessageType type_of(const Message& msg) {
  return static_cast<MessageType>(msg.index() + 1);
}

// --- decoding -------------------------------------------------------------

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) bad(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t unsigned_int(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_unsigned()) bad(std::string("field '") + key + "' must be an unsigned integer");
  return v.get<std::uint64_t>();
}

std::string text(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) bad(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

bool boolean(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_boolean()) bad(std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

reefworld::SubstrateClass substrate(const json& j, const char* key) {
  try {
    return reefworld::substrate_from_string(text(j, key));
  } catch (const Error& e) {
    bad(e.what());
  }
}

TelemetryMessage decode_telemetry(const json& j) {
  TelemetryMessage m;
  m.vehicle_id = text(j, "vehicle_id");
  m.sequence = unsigned_int(j, "sequence");
  m.timestamp = number(j, "timestamp");
  const json& pose = field(j, "pose");
  m.pose = {number(pose, "x"), number(pose, "y"), number(pose, "heading")};
  m.battery = number(j, "battery");
  m.gauge = number(j, "gauge");
  const json& d = field(j, "last_decision");
  if (!d.is_null()) m.last_decision = Decision{{number(d, "x"), number(d, "y")}, substrate(d, "predicted")};
  const json& progress = field(j, "progress");
  m.waypoint_index = unsigned_int(progress, "waypoint");
  m.mission_complete = boolean(progress, "complete");
  return m;
}

vehicle::PayloadConfig decode_payload(const json& j) {
  const std::string kind = text(j, "kind");
  vehicle::PayloadConfig p;
  if (kind == "collection")
    p = vehicle::Collection{};
  else if (kind == "dispersal")
    p = vehicle::Dispersal{number(j, "bladder_capacity_l")};
  else if (kind == "monitoring")
    p = vehicle::Monitoring{number(j, "camera_footprint_m")};
  else
    bad("unknown payload kind '" + kind + "'");
  try {
    vehicle::validate(p);
  } catch (const Error& e) {
    bad(e.what());
  }
  return p;
}

CommandMessage decode_command(const json& j) {
  CommandMessage m;
  m.vehicle_id = text(j, "vehicle_id");
  const std::string name = text(j, "command");
  if (name == "upload_mission") {
    const json& mj = field(j, "mission");
    guidance::Mission mission;
    const json& wps = field(mj, "waypoints");
    if (!wps.is_array()) bad("waypoints must be an array");
    for (const json& w : wps) {
      if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
        bad("waypoint must be [x, y]");
      mission.waypoints.push_back({w[0].get<double>(), w[1].get<double>()});
    }
    mission.arrival_radius = number(mj, "arrival_radius");
    mission.mode = mission_mode_from(text(mj, "mode"));
    try {
      mission.validate();
    } catch (const Error& e) {
      bad(e.what());
    }
    m.command = UploadMission{std::move(mission)};
  } else if (name == "set_payload") {
    m.command = SetPayload{decode_payload(field(j, "payload"))};
  } else if (name == "set_dispersal_mode") {
    try {
      m.command = SetDispersalMode{dispersal::dispersal_mode_from_string(text(j, "mode"))};
    } catch (const Error& e) {
      if (e.code() == Errc::Decode) throw;
      bad(e.what());
    }
  } else if (name == "start") {
    m.command = Start{};
  } else if (name == "stop") {
    m.command = Stop{};
  } else if (name == "return_home") {
    m.command = ReturnHome{};
  } else {
    bad("unknown command '" + name + "'");
  }
  return m;
}

CommandReply decode_reply(const json& j) {
  return {text(j, "vehicle_id"), boolean(j, "accepted"), text(j, "reason")};
}

}  // namespace

std::string to_json(const Message& msg) {
  try {
    return std::visit([](const auto& m) { return encode(m).dump(); }, msg);
  } catch (const json::exception& e) {
    throw Error(Errc::Encoding, e.what());
  }
}

Message from_json(MessageType type, std::string_view payload) {
  json j;
  try {
    j = json::parse(payload);
  } catch (const json::exception&) {
    bad("payload is not valid JSON");
  }
  if (!j.is_object()) bad("payload must be a JSON object");
  Message msg;
  switch (type) {
    case MessageType::Telemetry: msg = decode_telemetry(j); break;
    case MessageType::Command: msg = decode_command(j); break;
    case MessageType::CommandReply: msg = decode_reply(j); break;
    default: bad("unknown message type tag");
  }
  // Only the canonical form of a message is a valid encoding.
  std::string canonical;
  try {
    canonical = to_json(msg);
  } catch (const Error& e) {
    bad(e.what());
  }
  if (canonical != payload) bad("payload is not in canonical form");
  return msg;
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
  const std::string payload = to_json(msg);
  if (payload.size() > kMaxPayload) throw Error(Errc::Encoding, "payload exceeds 64 KiB");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::vector<std::uint8_t> frame;
  frame.reserve(kHeaderSize + payload.size());
  frame.push_back(static_cast<std::uint8_t>(n >> 24));
  frame.push_back(static_cast<std::uint8_t>(n >> 16));
  frame.push_back(static_cast<std::uint8_t>(n >> 8));
  frame.push_back(static_cast<std::uint8_t>(n));
  frame.push_back(static_cast<std::uint8_t>(type_of(msg)));
  frame.insert(frame.end(), payload.begin(), payload.end());
  return frame;
}

namespace {

std::uint32_t read_length(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

void check_length(std::uint32_t n) {
  if (n == 0) bad("frame payload is empty");
  if (n > kMaxPayload) bad("frame payload exceeds 64 KiB");
}

}  // namespace

Message decode_message(std::span<const std::uint8_t> frame) {
  if (frame.size() < kHeaderSize + 1) bad("frame shorter than the minimum length");
  const std::uint32_t n = read_length(frame.data());
  check_length(n);
  if (frame.size() != kHeaderSize + n) bad("frame length does not match its header");
  const std::uint8_t tag = frame[4];
  if (tag < 1 || tag > 3) bad("unknown message type tag");
  const std::string_view payload(reinterpret_cast<const char*>(frame.data() + kHeaderSize), n);
  return from_json(static_cast<MessageType>(tag), payload);
}

void FrameReader::feed(std::span<const std::uint8_t> bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<std::vector<std::uint8_t>> FrameReader::next_frame() {
  if (poisoned_) bad("stream already failed framing");
  if (buffered() < 4) return std::nullopt;
  const std::uint32_t n = read_length(buffer_.data() + offset_);
  if (n == 0 || n > kMaxPayload) {
    poisoned_ = true;
    check_length(n);
  }
  if (buffered() < kHeaderSize + n) return std::nullopt;
  const auto begin = buffer_.begin() + static_cast<std::ptrdiff_t>(offset_);
  std::vector<std::uint8_t> frame(begin, begin + static_cast<std::ptrdiff_t>(kHeaderSize + n));
  offset_ += kHeaderSize + n;
  if (offset_ > 4096 && offset_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return frame;
}

}  // namespace reefsim::fleetlink
