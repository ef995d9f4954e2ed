// version.hpp — library version string used in run manifests

#pragma once

namespace qsn {

inline constexpr const char* version = "0.1.0";

} // namespace qsn
