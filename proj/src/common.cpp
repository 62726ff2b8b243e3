#include "valuelens/common.hpp"

#include <openssl/evp.h>

#include <boost/tokenizer.hpp>

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

namespace valuelens {

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string short_hash(std::string_view data) { return sha256_hex(data).substr(0, 16); }

double stable_round(double x) {
  if (x == 0.0) return 0.0;
  if (!std::isfinite(x)) return x;
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                           std::chars_format::general, 12);
  double out = 0.0;
  std::from_chars(buf.data(), res.ptr, out);
  return out == 0.0 ? 0.0 : out;
}

std::string format_number(double x) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), stable_round(x));
  return std::string(buf.data(), res.ptr);
}

std::string format_fixed(double x, int decimals) {
  std::array<char, 64> buf{};
  double v = x;
  if (v == 0.0) v = 0.0;  // drop negative zero
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                           std::chars_format::fixed, decimals);
  std::string s(buf.data(), res.ptr);
  if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::string clean(line);
  if (!clean.empty() && clean.back() == '\r') clean.pop_back();
  bool quoted = false;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (clean[i] == '\\') {
      ++i;
    } else if (clean[i] == '"') {
      quoted = !quoted;
    }
  }
  if (quoted) throw Error("malformed CSV line: unterminated quote");
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::vector<std::string> out;
  try {
    Tokenizer tok(clean, boost::escaped_list_separator<char>('\\', ',', '"'));
    for (const auto& t : tok) out.push_back(trim(t));
  } catch (const boost::escaped_list_error& e) {
    throw Error(std::string("malformed CSV line: ") + e.what());
  }
  return out;
}

std::string csv_field(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '"') c = '\'';
  }
  if (out.find(',') != std::string::npos || out.find('\\') != std::string::npos) {
    std::string quoted = "\"";
    for (char c : out) {
      if (c == '\\') quoted += '\\';
      quoted += c;
    }
    return quoted + "\"";
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace valuelens
