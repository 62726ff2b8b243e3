#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace valuelens {

/// Base class for every error the toolkit reports to callers.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// First 16 hex digits of the SHA-256; used for prompt ids, premise keys and
/// cache keys.
std::string short_hash(std::string_view data);

/// Rounds to 12 significant digits. Every number that leaves the process goes
/// through this so that serialized artifacts do not depend on last-ulp noise.
double stable_round(double x);

/// Shortest decimal text for stable_round(x).
std::string format_number(double x);

/// Fixed-point text with `decimals` digits after the point (SVG coordinates).
std::string format_fixed(double x, int decimals);

std::string trim(std::string_view s);

/// Splits one CSV line (comma separated, double-quoted fields allowed) and
/// trims each field. Throws Error on an unterminated quote.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a CSV field when it contains a comma; embedded double quotes are
/// replaced by single quotes.
std::string csv_field(std::string_view s);

/// UTC timestamp, ISO-8601 with seconds.
std::string utc_timestamp();

std::string read_text_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames, so readers never observe a
/// partially written file.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace valuelens
