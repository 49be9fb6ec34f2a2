#include "reefsim/common.hpp"

namespace reefsim {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidParameter: return "invalid-parameter";
    case Errc::OutOfBounds: return "out-of-bounds";
    case Errc::InvalidState: return "invalid-state";
    case Errc::UndefinedEndurance: return "undefined-endurance";
    case Errc::FleetSize: return "fleet-size";
    case Errc::FleetCapacity: return "fleet-capacity";
    case Errc::UnknownVehicle: return "unknown-vehicle";
    case Errc::Dispatch: return "dispatch";
    case Errc::Encoding: return "encoding";
    case Errc::Decode: return "decode";
    case Errc::Configuration: return "configuration";
    case Errc::EmptyLog: return "empty-log";
    case Errc::DataIntegrity: return "data-integrity";
    case Errc::Timeout: return "timeout";
    case Errc::Io: return "io";
  }
  return "unknown";
}

}  // namespace reefsim
