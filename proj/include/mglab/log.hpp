#pragma once

#include <iostream>
#include <string_view>

namespace mglab {

// Destination for library warnings; null silences them.
inline std::ostream*& warning_stream() noexcept {
  static std::ostream* stream = &std::cerr;
  return stream;
}

inline void warn(std::string_view message) {
  if (auto* out = warning_stream()) *out << "warning: " << message << '\n';
}

}  // namespace mglab
