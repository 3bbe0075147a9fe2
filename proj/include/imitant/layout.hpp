#pragma once

#include <vector>

#include "imitant/common.hpp"

namespace imitant {

// Describes how the rows of a stacked [batch*width x d] matrix group into
// padded sequences: sequence b owns rows [b*width, (b+1)*width) of which the
// first lengths[b] are real tokens and the rest are padding.
struct RowLayout {
  int batch = 0;
  int width = 0;
  std::vector<int> lengths;

  RowLayout() = default;
  RowLayout(int batch_, int width_, std::vector<int> lengths_)
      : batch(batch_), width(width_), lengths(std::move(lengths_)) {
    IMITANT_CHECK(static_cast<int>(lengths.size()) == batch, "lengths size ", lengths.size(),
                  " != batch ", batch);
    for (int len : lengths) {
      IMITANT_CHECK(len >= 1 && len <= width, "sequence length ", len, " outside [1, ", width, "]");
    }
  }

  static RowLayout single(int length) { return RowLayout(1, length, {length}); }

  int rows() const { return batch * width; }

  int valid_rows() const {
    int n = 0;
    for (int len : lengths) n += len;
    return n;
  }

  bool row_valid(int row) const { return (row % width) < lengths[static_cast<std::size_t>(row / width)]; }

  // flat 0/1 flags per row, in row order
  std::vector<unsigned char> valid_flags() const {
    std::vector<unsigned char> f(static_cast<std::size_t>(rows()), 0);
    for (int b = 0; b < batch; ++b) {
      for (int t = 0; t < lengths[static_cast<std::size_t>(b)]; ++t) {
        f[static_cast<std::size_t>(b) * width + t] = 1;
      }
    }
    return f;
  }
};

}  // namespace imitant
