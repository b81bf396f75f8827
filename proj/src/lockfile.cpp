#include "cthge/lockfile.hpp"

#include <algorithm>

#include "cthge/error.hpp"
#include "cthge/text.hpp"

namespace cthge {

KvEntries read_kv_file(const std::string& path) {
  KvEntries out;
  std::string text = read_file(path);
  std::size_t start = 0;
  std::size_t lineno = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find('\n', start);
    std::string line = pos == std::string::npos ? text.substr(start)
                                                : text.substr(start, pos - start);
    ++lineno;
    if (!line.empty() && line[0] != '#') {
      std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": expected key=value");
      }
      out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

void write_lock(const std::string& dir, KvEntries entries) {
  std::sort(entries.begin(), entries.end());
  std::string text;
  for (const auto& [k, v] : entries) {
    text += k;
    text += '=';
    text += v;
    text += '\n';
  }
  write_file(dir + "/config.lock", text);
}

}  // namespace cthge
