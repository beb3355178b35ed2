#include "cholsim/grid.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cholsim {

BinaryMask class_mask(const LabelMask& labels, TissueClass cls) {
  BinaryMask out(labels.width(), labels.height(), 0);
  for (int y = 0; y < labels.height(); ++y)
    for (int x = 0; x < labels.width(); ++x)
      if (labels.at(x, y) == cls) out.at(x, y) = 1;
  return out;
}

int count_class(const LabelMask& labels, TissueClass cls) {
  int n = 0;
  for (const TissueClass c : labels.data())
    if (c == cls) ++n;
  return n;
}

int count_set(const BinaryMask& mask) {
  int n = 0;
  for (const std::uint8_t v : mask.data())
    if (v) ++n;
  return n;
}

void write_pgm(const LabelMask& labels, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "P5\n" << labels.width() << " " << labels.height() << "\n255\n";
  for (const TissueClass c : labels.data())
    out.put(static_cast<char>(static_cast<std::uint8_t>(c)));
  if (!out) throw IoError("short write: " + path);
}

LabelMask read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (magic != "P5" || width <= 0 || height <= 0 || maxval != 255)
    throw IoError("not a P5 label image: " + path);
  in.get();  // single whitespace after header
  LabelMask labels(width, height, TissueClass::Background);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int byte = in.get();
      if (byte < 0 || byte > 3) throw IoError("bad class id in " + path);
      labels.at(x, y) = static_cast<TissueClass>(byte);
    }
  }
  return labels;
}

}  // namespace cholsim
