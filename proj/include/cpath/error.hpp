#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpath {

enum class Errc {
  InvalidArgument,
  EmptyPatch,
  OutOfRange,
  EmptySet,
  BadK,
  DimensionMismatch,
  SingleClassPair,
  UnmappedLabel,
  TinyClass,
  ZeroSupportClass,
  MissingColumn,
  DuplicatePath,
  EmptyManifest,
  BadRecord,
  UnsupportedFormat,
  CorruptImage,
  BadMagic,
  BadVersion,
  CorruptFile,
  ConfigInvalid,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

/// Library-wide exception. what() carries "<ErrcName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace cpath
