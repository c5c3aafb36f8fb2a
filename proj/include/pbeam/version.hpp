#pragma once

namespace pbeam {

inline constexpr const char* kVersion = "1.0.0";

} // namespace pbeam
