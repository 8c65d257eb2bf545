#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fprune {

enum class Errc {
  io,
  bad_magic,
  version_mismatch,
  truncated,
  shape_mismatch,
  non_finite,
  invalid_snapshot,
  unknown_layer,
  not_conv,
  out_of_range,
  singleton_cluster,
  single_cluster,
  length_mismatch,
  inconsistent_graph,
  add_conflict,
  topology_mismatch,
  missing_spatial,
  invalid_argument,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace fprune
