#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <vector>

#include "json.hpp"

namespace valuelens {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Reads one JSON value per non-blank line. A missing file reads as empty.
/// A truncated final line (interrupted writer) is skipped; any other parse
/// error throws with the line number.
std::vector<ordered_json> read_jsonl(const std::filesystem::path& path);

/// Append-only JSON-lines sink. Appends are serialized and flushed per line.
class JsonlWriter {
 public:
  enum class Mode { append, truncate };

  explicit JsonlWriter(const std::filesystem::path& path, Mode mode = Mode::append);

  void write(const ordered_json& value);
  std::size_t lines_written() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::size_t written_ = 0;
};

/// Writes `values` to `path` atomically, one per line.
void write_jsonl(const std::filesystem::path& path, const std::vector<ordered_json>& values);

}  // namespace valuelens
