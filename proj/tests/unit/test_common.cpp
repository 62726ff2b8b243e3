#include <doctest.h>

#include <cmath>
#include <limits>

#include "testing.hpp"
#include "valuelens/common.hpp"
#include "valuelens/jsonl.hpp"

using namespace valuelens;

TEST_SUITE("common") {

TEST_CASE("sha256 of a known string") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(short_hash("abc") == "ba7816bf8f01cfea");
}

TEST_CASE("stable_round absorbs last-bit noise") {
  CHECK(stable_round(0.1 + 0.2) == 0.3);
  CHECK(stable_round(-0.0) == 0.0);
  CHECK(std::signbit(stable_round(-0.0)) == false);
  CHECK(std::isnan(stable_round(std::numeric_limits<double>::quiet_NaN())));
  CHECK(stable_round(1.0 / 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(format_number(0.1 + 0.2) == "0.3");
  CHECK(format_number(-3.03) == "-3.03");
  CHECK(format_fixed(-0.001, 2) == "0.00");
}

TEST_CASE("csv split and quote round trip") {
  const std::string field = "a \"quoted\", comma";
  const auto line = csv_field("plain") + "," + csv_field(field) + "," + csv_field("");
  const auto parts = split_csv_line(line);
  REQUIRE(parts.size() == 3);
  CHECK(parts[0] == "plain");
  CHECK(parts[1] == "a 'quoted', comma");
  CHECK(parts[2].empty());
  CHECK_THROWS_AS(split_csv_line("\"unterminated"), Error);
}

TEST_CASE("jsonl tolerates a truncated final line only") {
  testing::TempDir dir;
  const auto p = dir / "x.jsonl";
  write_text_file(p, "{\"a\":1}\n{\"a\":2}\n{\"a\":");
  const auto rows = read_jsonl(p);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1]["a"] == 2);
  write_text_file(p, "{\"a\":1}\nnot json\n{\"a\":3}\n");
  CHECK_THROWS_AS(read_jsonl(p), Error);
  CHECK(read_jsonl(dir / "missing.jsonl").empty());
}

TEST_CASE("jsonl writer appends") {
  testing::TempDir dir;
  const auto p = dir / "w.jsonl";
  {
    JsonlWriter w(p);
    w.write(ordered_json{{"k", 1}});
  }
  {
    JsonlWriter w(p);
    w.write(ordered_json{{"k", 2}});
    CHECK(w.lines_written() == 1);
  }
  CHECK(read_jsonl(p).size() == 2);
  {
    JsonlWriter w(p, JsonlWriter::Mode::truncate);
  }
  CHECK(read_jsonl(p).empty());
}

}
