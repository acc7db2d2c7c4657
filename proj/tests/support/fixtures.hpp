#pragma once

// Hand-built dataset files in the IDX and CIFAR binary layouts.

#include <cstdint>
#include <vector>

namespace rp_test {

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline std::vector<std::uint8_t> idx_images(std::uint32_t count, std::uint32_t rows,
                                            std::uint32_t cols,
                                            const std::vector<std::uint8_t>& pixels) {
  std::vector<std::uint8_t> out;
  put_be32(out, 0x00000803);
  put_be32(out, count);
  put_be32(out, rows);
  put_be32(out, cols);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

inline std::vector<std::uint8_t> idx_labels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> out;
  put_be32(out, 0x00000801);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

// Two 2x3 images: pixel value 10 * image + 3 * row + col, scaled into 0..255.
inline std::vector<std::uint8_t> two_image_pixels() {
  std::vector<std::uint8_t> p;
  for (int n = 0; n < 2; ++n)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) p.push_back(static_cast<std::uint8_t>(40 * n + 17 * r + 5 * c));
  return p;
}

// One CIFAR record: label prefix bytes, then 3 planes of 32x32.
inline std::vector<std::uint8_t> cifar_record(const std::vector<std::uint8_t>& prefix,
                                              std::uint8_t seed) {
  std::vector<std::uint8_t> rec(prefix);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 1024; ++i) rec.push_back(static_cast<std::uint8_t>((seed + 7 * c + i) % 256));
  // pixel (0,0) = (255, 0, 0)
  rec[prefix.size()] = 255;
  rec[prefix.size() + 1024] = 0;
  rec[prefix.size() + 2048] = 0;
  return rec;
}

}  // namespace rp_test
