#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cholsim/errors.hpp"

namespace cholsim {

// Dense row-major 2D grid; (x, y) with y down, matching image coordinates.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        cells_(static_cast<std::size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0)
      throw DimensionMismatch("grid dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  T& at(int x, int y) { return cells_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const {
    return cells_[static_cast<std::size_t>(y) * width_ + x];
  }

  // Out-of-bounds reads return `fallback`; used by windowed scans.
  T get_or(int x, int y, T fallback) const {
    return in_bounds(x, y) ? at(x, y) : fallback;
  }

  void fill(T value) { cells_.assign(cells_.size(), value); }

  std::vector<T>& data() { return cells_; }
  const std::vector<T>& data() const { return cells_; }

  bool operator==(const Grid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> cells_;
};

enum class TissueClass : std::uint8_t {
  Background = 0,
  Liver = 1,
  Gallbladder = 2,
  LiverBed = 3,
};

using LabelMask = Grid<TissueClass>;
using BinaryMask = Grid<std::uint8_t>;  // 0 = clear, 1 = set
using DepthMap = Grid<double>;          // mm along the optical axis

struct PixelCoord {
  int x = 0;
  int y = 0;
  bool operator==(const PixelCoord&) const = default;
};

// Binary mask of one class.
BinaryMask class_mask(const LabelMask& labels, TissueClass cls);

int count_class(const LabelMask& labels, TissueClass cls);
int count_set(const BinaryMask& mask);

// Writes the label grid as a binary PGM (P5), one byte per pixel holding the
// class id 0-3. Throws IoError on failure.
void write_pgm(const LabelMask& labels, const std::string& path);

// Reads a P5 PGM written by write_pgm. Throws IoError on malformed input.
LabelMask read_pgm(const std::string& path);

}  // namespace cholsim
