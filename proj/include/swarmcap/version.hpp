#pragma once

namespace swarmcap {

inline constexpr const char* kVersion = "0.1.0";

} // namespace swarmcap
