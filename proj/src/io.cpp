#include "stokesdg/io.hpp"

#include "stokesdg/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

namespace stokesdg {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  fs::create_directories(parent, ec);
  if (ec) throw InvalidArgument("io", "atomic_write", "cannot create " + parent.string() + ": " + ec.message());
  const fs::path tmp = parent / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("io", "atomic_write", "cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("io", "atomic_write", "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InvalidArgument("io", "atomic_write", "cannot rename onto " + path.string());
  }
}

} // namespace stokesdg
