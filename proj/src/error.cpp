#include "fprune/error.hpp"

namespace fprune {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::io: return "io";
    case Errc::bad_magic: return "bad_magic";
    case Errc::version_mismatch: return "version_mismatch";
    case Errc::truncated: return "truncated";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::non_finite: return "non_finite";
    case Errc::invalid_snapshot: return "invalid_snapshot";
    case Errc::unknown_layer: return "unknown_layer";
    case Errc::not_conv: return "not_conv";
    case Errc::out_of_range: return "out_of_range";
    case Errc::singleton_cluster: return "singleton_cluster";
    case Errc::single_cluster: return "single_cluster";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::inconsistent_graph: return "inconsistent_graph";
    case Errc::add_conflict: return "add_conflict";
    case Errc::topology_mismatch: return "topology_mismatch";
    case Errc::missing_spatial: return "missing_spatial";
    case Errc::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace fprune
