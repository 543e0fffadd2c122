#pragma once

#include <string>

namespace crossdiff {

inline constexpr const char* kVersion = "1.0.0";

/// Version string of the linked FFTW library.
std::string fftw_version_string();

}  // namespace crossdiff
