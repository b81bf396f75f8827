#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cthge {

using KvEntries = std::vector<std::pair<std::string, std::string>>;

// key=value lines; blank lines and '#' comments ignored.
KvEntries read_kv_file(const std::string& path);

// Writes <dir>/config.lock with entries sorted by key. The lock can be
// fed back through --config to reproduce a run.
void write_lock(const std::string& dir, KvEntries entries);

}  // namespace cthge
