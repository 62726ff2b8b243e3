#include "valuelens/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <vector>

namespace valuelens::kernels {

namespace {

void check_project_shapes(std::span<const std::int8_t> labels, std::span<const double> loadings,
                          std::span<double> out) {
  const std::size_t width = 2 * loadings.size();
  if (width == 0 || labels.size() != out.size() * width) {
    throw Error("project kernel: label matrix does not match loadings and output size");
  }
}

void check_tally_shapes(std::span<const std::uint32_t> hypothesis,
                        std::span<const std::int8_t> labels, std::span<LabelCounts> counts) {
  if (hypothesis.size() != labels.size()) throw Error("tally kernel: size mismatch");
  for (std::size_t k = 0; k < hypothesis.size(); ++k) {
    if (hypothesis[k] >= counts.size()) throw Error("tally kernel: hypothesis index out of range");
    if (labels[k] < -1 || labels[k] > 1) throw Error("tally kernel: label out of range");
  }
}

}  // namespace

void project_serial(std::span<const std::int8_t> labels, std::span<const double> loadings,
                    ProjectionMode mode, std::span<double> out) {
  check_project_shapes(labels, loadings, out);
  const std::size_t dims = loadings.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = project_row(labels.data() + r * 2 * dims, loadings.data(), dims, mode);
  }
}

void project_parallel(std::span<const std::int8_t> labels, std::span<const double> loadings,
                      ProjectionMode mode, std::span<double> out) {
  check_project_shapes(labels, loadings, out);
  const std::size_t dims = loadings.size();
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  const std::int8_t* base = labels.data();
  const double* w = loadings.data();
  double* dst = out.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    dst[r] = project_row(base + r * 2 * dims, w, dims, mode);
  }
}

void tally_serial(std::span<const std::uint32_t> hypothesis, std::span<const std::int8_t> labels,
                  std::span<LabelCounts> counts) {
  check_tally_shapes(hypothesis, labels, counts);
  std::fill(counts.begin(), counts.end(), LabelCounts{0, 0, 0});
  for (std::size_t k = 0; k < hypothesis.size(); ++k) {
    ++counts[hypothesis[k]][static_cast<std::size_t>(labels[k] + 1)];
  }
}

void tally_parallel(std::span<const std::uint32_t> hypothesis, std::span<const std::int8_t> labels,
                    std::span<LabelCounts> counts) {
  check_tally_shapes(hypothesis, labels, counts);
  std::fill(counts.begin(), counts.end(), LabelCounts{0, 0, 0});
  const auto n = static_cast<std::ptrdiff_t>(hypothesis.size());
  const std::size_t h = counts.size();
#pragma omp parallel
  {
    std::vector<LabelCounts> local(h, LabelCounts{0, 0, 0});
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      ++local[hypothesis[k]][static_cast<std::size_t>(labels[k] + 1)];
    }
#pragma omp critical
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t c = 0; c < 3; ++c) counts[i][c] += local[i][c];
    }
  }
}

namespace {

void check_sum_shapes(std::span<const double> values, std::span<const double> loadings,
                      std::span<double> out) {
  if (loadings.empty() || values.size() != out.size() * loadings.size()) {
    throw Error("weighted-sum kernel: value matrix does not match loadings and output size");
  }
}

inline double weighted_row(const double* row, const double* w, std::size_t dims) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dims; ++i) acc += w[i] * row[i];
  return acc;
}

}  // namespace

void weighted_sum_serial(std::span<const double> values, std::span<const double> loadings,
                         std::span<double> out) {
  check_sum_shapes(values, loadings, out);
  const std::size_t dims = loadings.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = weighted_row(values.data() + r * dims, loadings.data(), dims);
  }
}

void weighted_sum_parallel(std::span<const double> values, std::span<const double> loadings,
                           std::span<double> out) {
  check_sum_shapes(values, loadings, out);
  const std::size_t dims = loadings.size();
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  const double* base = values.data();
  const double* w = loadings.data();
  double* dst = out.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) dst[r] = weighted_row(base + r * dims, w, dims);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace valuelens::kernels
