#include "propas/atomic_file.hpp"

#include <fstream>
#include <random>
#include <string>

#include "propas/errors.hpp"

namespace propas {

void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    try {
      writer(out);
    } catch (...) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw;
    }
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write failed for " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename temporary file onto " + path.string());
  }
}

void write_atomically(const std::filesystem::path& path, std::string_view content) {
  write_atomically(path, [content](std::ostream& out) { out << content; });
}

}  // namespace propas
