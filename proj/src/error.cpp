#include "cpath/error.hpp"

namespace cpath {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::EmptyPatch: return "EmptyPatch";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::EmptySet: return "EmptySet";
    case Errc::BadK: return "BadK";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SingleClassPair: return "SingleClassPair";
    case Errc::UnmappedLabel: return "UnmappedLabel";
    case Errc::TinyClass: return "TinyClass";
    case Errc::ZeroSupportClass: return "ZeroSupportClass";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::DuplicatePath: return "DuplicatePath";
    case Errc::EmptyManifest: return "EmptyManifest";
    case Errc::BadRecord: return "BadRecord";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptImage: return "CorruptImage";
    case Errc::BadMagic: return "BadMagic";
    case Errc::BadVersion: return "BadVersion";
    case Errc::CorruptFile: return "CorruptFile";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code), detail_(detail) {}

}  // namespace cpath
