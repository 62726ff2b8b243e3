#include "valuelens/jsonl.hpp"

#include <string>

#include "valuelens/common.hpp"

namespace valuelens {

std::vector<ordered_json> read_jsonl(const std::filesystem::path& path) {
  std::vector<ordered_json> out;
  if (!std::filesystem::exists(path)) return out;
  const std::string text = read_text_file(path);
  std::size_t pos = 0;
  std::size_t lineno = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string_view line(text.data() + pos, (terminated ? nl : text.size()) - pos);
    pos = terminated ? nl + 1 : text.size();
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(ordered_json::parse(line));
    } catch (const ordered_json::parse_error& e) {
      // An unterminated last line is an interrupted append.
      if (!terminated) break;
      throw Error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, Mode mode) : path_(path) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  const auto flags = std::ios::binary | (mode == Mode::append ? std::ios::app : std::ios::trunc);
  out_.open(path_, flags);
  if (!out_) throw Error("cannot open " + path_.string() + " for writing");
}

void JsonlWriter::write(const ordered_json& value) {
  const std::string line = value.dump() + "\n";
  std::lock_guard lock(mu_);
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) throw Error("write failed for " + path_.string());
  ++written_;
}

std::size_t JsonlWriter::lines_written() const {
  std::lock_guard lock(mu_);
  return written_;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<ordered_json>& values) {
  std::string content;
  for (const auto& v : values) {
    content += v.dump();
    content += '\n';
  }
  write_text_file(path, content);
}

}  // namespace valuelens
