#pragma once

// Batch kernels behind the projection and tally operations. Each kernel has
// a serial reference and an OpenMP version; both produce bit-identical
// output because rows are independent and counts are integers.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "valuelens/labels.hpp"

namespace valuelens::kernels {

/// Counts per label, indexed by label + 1: {conflict, neutral, resonance}.
using LabelCounts = std::array<std::size_t, 3>;

/// Label row layout: 2*D entries, column 2i holds the traditional label of
/// dimension i and column 2i+1 the secular label.
inline double project_row(const std::int8_t* row, const double* loadings, std::size_t dims,
                          ProjectionMode mode) {
  double acc = 0.0;
  switch (mode) {
    case ProjectionMode::traditional_only:
      for (std::size_t i = 0; i < dims; ++i) acc += loadings[i] * row[2 * i];
      return 0.0 - acc;
    case ProjectionMode::secular_only:
      for (std::size_t i = 0; i < dims; ++i) acc += loadings[i] * row[2 * i + 1];
      return acc;
    case ProjectionMode::combined:
      for (std::size_t i = 0; i < dims; ++i) {
        acc += (loadings[i] / 2.0) * (row[2 * i + 1] - row[2 * i]);
      }
      return acc;
  }
  return acc;
}

/// labels: n rows of 2*loadings.size() entries; out: n values.
void project_serial(std::span<const std::int8_t> labels, std::span<const double> loadings,
                    ProjectionMode mode, std::span<double> out);
void project_parallel(std::span<const std::int8_t> labels, std::span<const double> loadings,
                      ProjectionMode mode, std::span<double> out);

/// counts[h] accumulates labels[k] for every k with hypothesis[k] == h.
/// `counts` is zeroed first.
void tally_serial(std::span<const std::uint32_t> hypothesis, std::span<const std::int8_t> labels,
                  std::span<LabelCounts> counts);
void tally_parallel(std::span<const std::uint32_t> hypothesis, std::span<const std::int8_t> labels,
                    std::span<LabelCounts> counts);

/// values: n rows of loadings.size() entries; out[r] = sum_i loadings[i] * values[r][i].
void weighted_sum_serial(std::span<const double> values, std::span<const double> loadings,
                         std::span<double> out);
void weighted_sum_parallel(std::span<const double> values, std::span<const double> loadings,
                           std::span<double> out);

/// Worker threads OpenMP will use for the parallel kernels.
int max_threads();

}  // namespace valuelens::kernels
