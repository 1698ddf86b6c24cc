// ============================================================================
// io.hpp - Small output helpers shared by the experiment harness and the CLI
// ============================================================================
#pragma once

#include <filesystem>
#include <string>

namespace stokesdg {

/// Shortest round-trip-safe text for a double: 17 significant digits, dot
/// decimal separator. Non-finite values print as "nan", "inf", "-inf".
std::string format_double(double v);

/// Writes content to path through a temporary file in the same directory
/// followed by a rename. Creates parent directories. Throws InvalidArgument
/// (module "io") on failure.
void atomic_write(const std::filesystem::path& path, const std::string& content);

} // namespace stokesdg
