#pragma once

namespace commlab {

inline constexpr const char* kVersionString = "0.1.0";

}  // namespace commlab
