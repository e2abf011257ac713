#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsms {

enum class Errc {
  dimension_mismatch,
  non_finite,
  out_of_range,
  ordering,
  bank_not_full,
  empty_candidates,
  invalid_config,
  unknown_key,
  misaligned,
  absent_object,
  bad_magic,
  unsupported_version,
  unsupported_dtype,
  truncated,
  malformed_pgm,
  duplicate_index,
  io,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::non_finite: return "non_finite";
    case Errc::out_of_range: return "out_of_range";
    case Errc::ordering: return "ordering";
    case Errc::bank_not_full: return "bank_not_full";
    case Errc::empty_candidates: return "empty_candidates";
    case Errc::invalid_config: return "invalid_config";
    case Errc::unknown_key: return "unknown_key";
    case Errc::misaligned: return "misaligned";
    case Errc::absent_object: return "absent_object";
    case Errc::bad_magic: return "bad_magic";
    case Errc::unsupported_version: return "unsupported_version";
    case Errc::unsupported_dtype: return "unsupported_dtype";
    case Errc::truncated: return "truncated";
    case Errc::malformed_pgm: return "malformed_pgm";
    case Errc::duplicate_index: return "duplicate_index";
    case Errc::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a stable code so callers
/// (and the CLI's error line) can branch on the class without parsing text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tsms
