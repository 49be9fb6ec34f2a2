#pragma once
// Fleet-control wire messages and their framing.
//
// Frame layout (all multi-byte integers big-endian):
//   u32  payload length N (bytes after the tag), 1 <= N <= 65536
//   u8   message type tag (1 telemetry, 2 command, 3 command reply)
//   N    canonical JSON payload, keys in fixed order, no whitespace
//
// Decoding accepts only canonical encodings: a frame decodes iff it is
// byte-identical to the encoding of the decoded message.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "reefsim/dispersal.hpp"
#include "reefsim/guidance.hpp"
#include "reefsim/vehicle.hpp"

namespace reefsim::fleetlink {

inline constexpr std::size_t kHeaderSize = 5;
inline constexpr std::size_t kMaxPayload = 64 * 1024;
inline constexpr std::uint16_t kDefaultPort = 7077;

enum class MessageType : std::uint8_t { Telemetry = 1, Command = 2, CommandReply = 3 };

struct Decision {
  Vec2 position;
  reefworld::SubstrateClass predicted = reefworld::SubstrateClass::Unsuitable;
  friend bool operator==(const Decision&, const Decision&) = default;
};

struct TelemetryMessage {
  std::string vehicle_id;
  std::uint64_t sequence = 0;
  double timestamp = 0.0;
  vehicle::Pose2D pose;
  double battery = 1.0;
  double gauge = 0.0;
  std::optional<Decision> last_decision;
  std::uint64_t waypoint_index = 0;
  bool mission_complete = false;
  friend bool operator==(const TelemetryMessage&, const TelemetryMessage&) = default;
};

struct UploadMission {
  guidance::Mission mission;
  friend bool operator==(const UploadMission&, const UploadMission&) = default;
};
struct SetPayload {
  vehicle::PayloadConfig payload;
  friend bool operator==(const SetPayload&, const SetPayload&) = default;
};
struct SetDispersalMode {
  dispersal::DispersalMode mode = dispersal::DispersalMode::ClassifierGated;
  friend bool operator==(const SetDispersalMode&, const SetDispersalMode&) = default;
};
struct Start {
  friend bool operator==(const Start&, const Start&) = default;
};
struct Stop {
  friend bool operator==(const Stop&, const Stop&) = default;
};
struct ReturnHome {
  friend bool operator==(const ReturnHome&, const ReturnHome&) = default;
};

using Command = std::variant<UploadMission, SetPayload, SetDispersalMode, Start, Stop, ReturnHome>;

struct CommandMessage {
  std::string vehicle_id;
  Command command;
  friend bool operator==(const CommandMessage&, const CommandMessage&) = default;
};

struct CommandReply {
  std::string vehicle_id;
  bool accepted = false;
  std::string reason;
  friend bool operator==(const CommandReply&, const CommandReply&) = default;
};

using Message = std::variant<TelemetryMessage, CommandMessage, CommandReply>;

/// Canonical JSON text for the payload (no framing).
std::string to_json(const Message& msg);
/// Parses a payload of the given type; throws Decode on any schema violation.
Message from_json(MessageType type, std::string_view payload);

/// Throws Encoding for an invalid message or a payload above kMaxPayload.
std::vector<std::uint8_t> encode_message(const Message& msg);

/// Decodes exactly one frame occupying all of `frame`. Throws Decode.
Message decode_message(std::span<const std::uint8_t> frame);

/// Incremental frame extractor for a byte stream.
class FrameReader {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete frame, nullopt when more bytes are needed. Throws Decode
  /// on a header announcing an illegal length; the reader is then poisoned
  /// and the stream must be dropped.
  std::optional<std::vector<std::uint8_t>> next_frame();
  std::size_t buffered() const { return buffer_.size() - offset_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t offset_ = 0;
  bool poisoned_ = false;
};

}  // namespace reefsim::fleetlink
