#include "randpad/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "randpad/error.hpp"
#include "randpad/padding.hpp"

namespace randpad {

namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
constexpr std::size_t kCifarPixels = 3072;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at, const char* file,
                   const char* field) {
  if (b.size() < at + 4) {
    throw FormatError(std::string(file) + ": truncated header reading " + field);
  }
  return static_cast<std::uint32_t>(b[at]) << 24 | static_cast<std::uint32_t>(b[at + 1]) << 16 |
         static_cast<std::uint32_t>(b[at + 2]) << 8 | static_cast<std::uint32_t>(b[at + 3]);
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

}  // namespace

LabeledDataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels) {
  const std::uint32_t img_magic = be32(images, 0, "images", "magic");
  if (img_magic != kIdxImageMagic) {
    throw FormatError("images: bad magic " + hex(img_magic) + ", expected 0x00000803");
  }
  const std::uint32_t count = be32(images, 4, "images", "count");
  const std::uint32_t rows = be32(images, 8, "images", "rows");
  const std::uint32_t cols = be32(images, 12, "images", "cols");
  const std::size_t pixels = static_cast<std::size_t>(count) * rows * cols;
  if (images.size() < 16 + pixels) {
    throw FormatError("images: truncated pixel data (count " + std::to_string(count) + " x " +
                      std::to_string(rows) + "x" + std::to_string(cols) + " needs " +
                      std::to_string(16 + pixels) + " bytes, file has " +
                      std::to_string(images.size()) + ")");
  }
  if (images.size() > 16 + pixels) {
    throw FormatError("images: " + std::to_string(images.size() - 16 - pixels) +
                      " trailing bytes after pixel data");
  }

  const std::uint32_t lbl_magic = be32(labels, 0, "labels", "magic");
  if (lbl_magic != kIdxLabelMagic) {
    throw FormatError("labels: bad magic " + hex(lbl_magic) + ", expected 0x00000801");
  }
  const std::uint32_t lbl_count = be32(labels, 4, "labels", "count");
  if (lbl_count != count) {
    throw FormatError("labels: count " + std::to_string(lbl_count) +
                      " does not match images count " + std::to_string(count));
  }
  if (labels.size() != 8 + static_cast<std::size_t>(count)) {
    throw FormatError("labels: expected " + std::to_string(8 + static_cast<std::size_t>(count)) +
                      " bytes, file has " + std::to_string(labels.size()));
  }

  LabeledDataset ds;
  std::vector<float> data(pixels);
  for (std::size_t i = 0; i < pixels; ++i) data[i] = static_cast<float>(images[16 + i]) / 255.0f;
  ds.images = Tensor({count, 1, rows, cols}, std::move(data));
  ds.labels.assign(labels.begin() + 8, labels.end());
  std::uint32_t max_label = 0;
  for (auto l : ds.labels) max_label = std::max(max_label, l);
  ds.class_count = count == 0 ? 0 : std::max<std::size_t>(10, max_label + 1);
  return ds;
}

LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
  return parse_idx(read_file(images_path), read_file(labels_path));
}

LabeledDataset load_fashion_mnist(const std::filesystem::path& dir, Split split) {
  const std::string prefix = split == Split::train ? "train" : "t10k";
  return load_idx(dir / (prefix + "-images-idx3-ubyte"), dir / (prefix + "-labels-idx1-ubyte"));
}

LabeledDataset parse_cifar(std::span<const std::uint8_t> bytes, CifarVariant variant) {
  const std::size_t label_bytes = variant == CifarVariant::c10 ? 1 : 2;
  const std::size_t record = label_bytes + kCifarPixels;
  if (bytes.size() % record != 0) {
    throw FormatError("cifar: file size " + std::to_string(bytes.size()) +
                      " is not a multiple of the record size " + std::to_string(record));
  }
  const std::size_t count = bytes.size() / record;
  LabeledDataset ds;
  ds.class_count = variant == CifarVariant::c10 ? 10 : 100;
  std::vector<float> data(count * kCifarPixels);
  ds.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* rec = bytes.data() + i * record;
    const std::uint32_t label = rec[label_bytes - 1];
    if (label >= ds.class_count) {
      throw FormatError("cifar: record " + std::to_string(i) + " has label " +
                        std::to_string(label) + " >= " + std::to_string(ds.class_count));
    }
    ds.labels[i] = label;
    for (std::size_t j = 0; j < kCifarPixels; ++j) {
      data[i * kCifarPixels + j] = static_cast<float>(rec[label_bytes + j]) / 255.0f;
    }
  }
  ds.images = Tensor({count, 3, 32, 32}, std::move(data));
  return ds;
}

LabeledDataset load_cifar_file(const std::filesystem::path& path, CifarVariant variant) {
  try {
    return parse_cifar(read_file(path), variant);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

LabeledDataset load_cifar(const std::filesystem::path& dir, CifarVariant variant, Split split) {
  std::vector<std::filesystem::path> files;
  if (variant == CifarVariant::c10) {
    if (split == Split::train) {
      for (int i = 1; i <= 5; ++i) files.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
    } else {
      files.push_back(dir / "test_batch.bin");
    }
  } else {
    files.push_back(dir / (split == Split::train ? "train.bin" : "test.bin"));
  }
  std::vector<LabeledDataset> parts;
  for (const auto& f : files) parts.push_back(load_cifar_file(f, variant));
  if (parts.size() == 1) return std::move(parts.front());

  LabeledDataset ds;
  ds.class_count = parts.front().class_count;
  std::vector<Tensor> images;
  for (auto& p : parts) {
    images.push_back(std::move(p.images));
    ds.labels.insert(ds.labels.end(), p.labels.begin(), p.labels.end());
  }
  ds.images = stack_samples(images);
  return ds;
}

LabeledDataset take_range(const LabeledDataset& ds, std::size_t begin, std::size_t count) {
  if (begin > ds.size()) throw InvalidArgument("take_range: begin past end of dataset");
  count = std::min(count, ds.size() - begin);
  const Shape& s = ds.images.shape();
  LabeledDataset out;
  out.class_count = ds.class_count;
  out.normalization = ds.normalization;
  auto src = ds.images.data().subspan(begin * s.sample(), count * s.sample());
  out.images = Tensor({count, s.c, s.h, s.w}, std::vector<float>(src.begin(), src.end()));
  out.labels.assign(ds.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                    ds.labels.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return out;
}

LabeledDataset take_first(const LabeledDataset& ds, std::size_t count) {
  if (count == 0 || count >= ds.size()) return ds;
  return take_range(ds, 0, count);
}

LabeledDataset pad_to_multiple(const LabeledDataset& ds, std::size_t multiple) {
  if (multiple <= 1) return ds;
  const Shape& s = ds.images.shape();
  const std::size_t th = (s.h + multiple - 1) / multiple * multiple;
  const std::size_t tw = (s.w + multiple - 1) / multiple * multiple;
  if (th == s.h && tw == s.w) return ds;
  const std::size_t dh = th - s.h;
  const std::size_t dw = tw - s.w;
  LabeledDataset out = ds;
  out.images = apply_pad(ds.images, PaddingSpec{dw / 2, dw - dw / 2, dh / 2, dh - dh / 2});
  return out;
}

ChannelStats compute_channel_stats(const Tensor& images) {
  const Shape& s = images.shape();
  ChannelStats st;
  const auto count = static_cast<double>(s.n * s.plane());
  if (count == 0) throw FormatError("normalize: empty dataset");
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      for (float v : images.plane(n, c)) sum += v;
    }
    const double mean = sum / count;
    double sq = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      for (float v : images.plane(n, c)) sq += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(sq / count);
    if (!(sd > 0.0)) {
      throw FormatError("normalize: channel " + std::to_string(c) + " has zero standard deviation");
    }
    st.mean.push_back(static_cast<float>(mean));
    st.stddev.push_back(static_cast<float>(sd));
  }
  return st;
}

Tensor normalize_images(const Tensor& images, const ChannelStats& stats) {
  const Shape& s = images.shape();
  if (stats.mean.size() != s.c || stats.stddev.size() != s.c) {
    throw InvalidArgument("normalize: statistics for " + std::to_string(stats.mean.size()) +
                          " channels, images have " + std::to_string(s.c));
  }
  Tensor out(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const float m = stats.mean[c];
      const float inv = 1.0f / stats.stddev[c];
      auto src = images.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - m) * inv;
    }
  }
  return out;
}

LabeledDataset normalize(LabeledDataset ds) {
  const ChannelStats stats = compute_channel_stats(ds.images);
  return normalize(std::move(ds), stats);
}

LabeledDataset normalize(LabeledDataset ds, const ChannelStats& stats) {
  if (!ds.normalization.mean.empty()) throw InvalidArgument("normalize: dataset already normalized");
  ds.images = normalize_images(ds.images, stats);
  ds.normalization = stats;
  return ds;
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "black") return SyntheticKind::black;
  if (name == "white") return SyntheticKind::white;
  if (name == "noise") return SyntheticKind::noise;
  throw InvalidArgument("unknown synthetic image kind '" + std::string(name) + "'");
}

Tensor make_synthetic(SyntheticKind kind, const Shape& shape, RngStream* rng) {
  switch (kind) {
    case SyntheticKind::black: return Tensor(shape, 0.0f);
    case SyntheticKind::white: return Tensor(shape, 1.0f);
    case SyntheticKind::noise: {
      if (rng == nullptr) throw InvalidArgument("make_synthetic: noise needs an rng stream");
      Tensor t(shape);
      for (float& v : t.data()) {
        const double z = std::clamp(rng->normal(), -3.0, 3.0);
        v = static_cast<float>((z + 3.0) / 6.0);
      }
      return t;
    }
  }
  return {};
}

PatternKind parse_pattern_kind(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "HG" || up == "H") return PatternKind::HG;
  if (up == "VG" || up == "V") return PatternKind::VG;
  if (up == "G") return PatternKind::G;
  if (up == "HS") return PatternKind::HS;
  if (up == "VS") return PatternKind::VS;
  throw InvalidArgument("unknown ground-truth pattern '" + std::string(name) + "'");
}

std::string to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::HG: return "HG";
    case PatternKind::VG: return "VG";
    case PatternKind::G: return "G";
    case PatternKind::HS: return "HS";
    case PatternKind::VS: return "VS";
  }
  return "?";
}

Tensor make_gt_pattern(const GroundTruthPattern& p, std::size_t h, std::size_t w) {
  if (h == 0 || w == 0) throw InvalidArgument("make_gt_pattern: zero extent");
  const bool gradient = p.kind == PatternKind::HG || p.kind == PatternKind::VG ||
                        p.kind == PatternKind::G;
  if (gradient && (h < 2 || w < 2)) {
    throw InvalidArgument("make_gt_pattern: gradient patterns need h, w >= 2");
  }
  if (!gradient && p.period < 2) throw InvalidArgument("make_gt_pattern: stripe period must be >= 2");
  Tensor out({1, 1, h, w});
  const double sigma = p.sigma > 0.0 ? p.sigma : static_cast<double>(w) / 4.0;
  const double cx = (static_cast<double>(w) - 1.0) / 2.0;
  const double cy = (static_cast<double>(h) - 1.0) / 2.0;
  const std::size_t half = p.period / 2;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double v = 0.0;
      switch (p.kind) {
        case PatternKind::HG: v = static_cast<double>(x) / static_cast<double>(w - 1); break;
        case PatternKind::VG: v = static_cast<double>(y) / static_cast<double>(h - 1); break;
        case PatternKind::G: {
          const double dx = static_cast<double>(x) - cx;
          const double dy = static_cast<double>(y) - cy;
          v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
          break;
        }
        case PatternKind::HS: v = (y % p.period) < half ? 1.0 : 0.0; break;
        case PatternKind::VS: v = (x % p.period) < half ? 1.0 : 0.0; break;
      }
      out.at(0, 0, y, x) = static_cast<float>(v);
    }
  }
  if (p.kind == PatternKind::G) {
    // Even extents have no pixel on the centre; rescale so the peak is 1.
    const float peak = *std::max_element(out.data().begin(), out.data().end());
    if (peak != 1.0f) {
      for (float& v : out.data()) v /= peak;
    }
  }
  return out;
}

}  // namespace randpad
