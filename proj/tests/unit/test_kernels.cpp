#include <doctest.h>

#include <random>
#include <vector>

#include "valuelens/kernels.hpp"

using namespace valuelens;
namespace k = valuelens::kernels;

TEST_SUITE("kernels") {

TEST_CASE("parallel kernels match the serial references bit for bit") {
  std::mt19937_64 rng(11);
  const std::vector<double> w{0.7, 0.61, 0.61, 0.60, 0.51};
  for (std::size_t rows : {0u, 1u, 7u, 1000u, 20011u}) {
    std::vector<std::int8_t> labels(rows * 10);
    std::vector<std::uint32_t> hyp(rows * 10);
    std::vector<double> values(rows * 5);
    for (auto& l : labels) l = static_cast<std::int8_t>(static_cast<int>(rng() % 3) - 1);
    for (std::size_t i = 0; i < hyp.size(); ++i) hyp[i] = static_cast<std::uint32_t>(rng() % 10);
    for (auto& v : values) v = static_cast<double>(rng() % 2001) / 1000.0 - 1.0;
    for (auto mode : kAllModes) {
      std::vector<double> a(rows), b(rows);
      k::project_serial(labels, w, mode, a);
      k::project_parallel(labels, w, mode, b);
      CHECK(a == b);
    }
    std::vector<k::LabelCounts> ca(10), cb(10);
    k::tally_serial(hyp, labels, ca);
    k::tally_parallel(hyp, labels, cb);
    CHECK(ca == cb);
    std::size_t total = 0;
    for (const auto& c : ca) total += c[0] + c[1] + c[2];
    CHECK(total == labels.size());
    std::vector<double> sa(rows), sb(rows);
    k::weighted_sum_serial(values, w, sa);
    k::weighted_sum_parallel(values, w, sb);
    CHECK(sa == sb);
  }
  CHECK(k::max_threads() >= 1);
}

TEST_CASE("shape mismatches throw") {
  const std::vector<double> w{0.5, 0.5};
  std::vector<std::int8_t> labels(7);
  std::vector<double> out(2);
  CHECK_THROWS_AS(k::project_serial(labels, w, ProjectionMode::combined, out), Error);
  std::vector<std::uint32_t> hyp{0, 5};
  std::vector<std::int8_t> two{1, 1};
  std::vector<k::LabelCounts> counts(2);
  CHECK_THROWS_AS(k::tally_serial(hyp, two, counts), Error);
}

}
