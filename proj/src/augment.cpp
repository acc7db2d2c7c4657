#include "randpad/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "randpad/error.hpp"
#include "randpad/padding.hpp"

namespace randpad {

namespace {

void require_single(const Tensor& img, const char* op) {
  if (img.shape().n != 1) {
    throw InvalidArgument(std::string(op) + ": expected a single image, got " + img.shape().str());
  }
}

}  // namespace

Tensor crop_window(const Tensor& img, std::size_t pad, std::size_t top, std::size_t left) {
  require_single(img, "crop_window");
  const Shape& s = img.shape();
  if (top > 2 * pad || left > 2 * pad) throw InvalidArgument("crop_window: offset out of range");
  Tensor out(s);
  for (std::size_t c = 0; c < s.c; ++c) {
    auto src = img.plane(0, c);
    auto dst = out.plane(0, c);
    for (std::size_t y = 0; y < s.h; ++y) {
      // Row y of the window is row (y + top - pad) of the original.
      const auto sy = static_cast<std::ptrdiff_t>(y + top) - static_cast<std::ptrdiff_t>(pad);
      if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(s.h)) continue;
      for (std::size_t x = 0; x < s.w; ++x) {
        const auto sx = static_cast<std::ptrdiff_t>(x + left) - static_cast<std::ptrdiff_t>(pad);
        if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(s.w)) continue;
        dst[y * s.w + x] = src[static_cast<std::size_t>(sy) * s.w + static_cast<std::size_t>(sx)];
      }
    }
  }
  return out;
}

Tensor random_crop(const Tensor& img, std::size_t pad, RngStream& rng) {
  const std::size_t top = rng.uniform_index(2 * pad + 1);
  const std::size_t left = rng.uniform_index(2 * pad + 1);
  return crop_window(img, pad, top, left);
}

Tensor flip_horizontal(const Tensor& img) {
  require_single(img, "flip_horizontal");
  const Shape& s = img.shape();
  Tensor out(s);
  for (std::size_t c = 0; c < s.c; ++c) {
    auto src = img.plane(0, c);
    auto dst = out.plane(0, c);
    for (std::size_t y = 0; y < s.h; ++y) {
      for (std::size_t x = 0; x < s.w; ++x) dst[y * s.w + (s.w - 1 - x)] = src[y * s.w + x];
    }
  }
  return out;
}

Tensor random_flip(const Tensor& img, double p, RngStream& rng) {
  return rng.bernoulli(p) ? flip_horizontal(img) : img;
}

Tensor rotate(const Tensor& img, double degrees) {
  require_single(img, "rotate");
  if (degrees == 0.0) return img;
  const Shape& s = img.shape();
  const double rad = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  const double cx = (static_cast<double>(s.w) - 1.0) / 2.0;
  const double cy = (static_cast<double>(s.h) - 1.0) / 2.0;
  Tensor out(s);
  for (std::size_t y = 0; y < s.h; ++y) {
    for (std::size_t x = 0; x < s.w; ++x) {
      // Inverse map: rotate the output offset clockwise (y axis points down).
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double sx = cs * dx - sn * dy + cx;
      const double sy = sn * dx + cs * dy + cy;
      const long ix = std::lround(sx);
      const long iy = std::lround(sy);
      if (ix < 0 || iy < 0 || ix >= static_cast<long>(s.w) || iy >= static_cast<long>(s.h)) continue;
      for (std::size_t c = 0; c < s.c; ++c) {
        out.at(0, c, y, x) = img.at(0, c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
      }
    }
  }
  return out;
}

Tensor random_rotation(const Tensor& img, double max_degrees, RngStream& rng) {
  return rotate(img, rng.uniform(-max_degrees, max_degrees));
}

std::optional<EraseRect> sample_erase_rect(std::size_t h, std::size_t w, const EraseParams& params,
                                           RngStream& rng) {
  const double area = static_cast<double>(h * w);
  for (std::size_t attempt = 0; attempt < params.attempts; ++attempt) {
    const double target = rng.uniform(params.area_lo, params.area_hi) * area;
    const double aspect = rng.uniform(params.aspect_lo, params.aspect_hi);
    const auto eh = static_cast<std::size_t>(std::lround(std::sqrt(target * aspect)));
    const auto ew = static_cast<std::size_t>(std::lround(std::sqrt(target / aspect)));
    if (eh == 0 || ew == 0 || eh >= h || ew >= w) continue;
    const double ratio = static_cast<double>(eh * ew) / area;
    const double ar = static_cast<double>(eh) / static_cast<double>(ew);
    if (ratio < params.area_lo || ratio > params.area_hi || ar < params.aspect_lo ||
        ar > params.aspect_hi) {
      continue;
    }
    EraseRect r;
    r.h = eh;
    r.w = ew;
    r.top = rng.uniform_index(h - eh + 1);
    r.left = rng.uniform_index(w - ew + 1);
    return r;
  }
  return std::nullopt;
}

Tensor erase_rect(const Tensor& img, const EraseRect& rect, const EraseParams& params,
                  RngStream& rng) {
  require_single(img, "erase_rect");
  const Shape& s = img.shape();
  if (rect.top + rect.h > s.h || rect.left + rect.w > s.w) {
    throw InvalidArgument("erase_rect: rectangle outside image");
  }
  Tensor out = img;
  for (std::size_t c = 0; c < s.c; ++c) {
    const double lo = params.fill_lo.empty() ? 0.0 : params.fill_lo.at(c);
    const double hi = params.fill_hi.empty() ? 1.0 : params.fill_hi.at(c);
    for (std::size_t y = rect.top; y < rect.top + rect.h; ++y) {
      for (std::size_t x = rect.left; x < rect.left + rect.w; ++x) {
        out.at(0, c, y, x) = static_cast<float>(rng.uniform(lo, hi));
      }
    }
  }
  return out;
}

Tensor random_erasing(const Tensor& img, const EraseParams& params, RngStream& rng,
                      std::optional<EraseRect>* erased) {
  if (erased != nullptr) erased->reset();
  if (!rng.bernoulli(params.p)) return img;
  const auto rect = sample_erase_rect(img.shape().h, img.shape().w, params, rng);
  if (!rect) return img;
  if (erased != nullptr) *erased = rect;
  return erase_rect(img, *rect, params, rng);
}

// ---------------------------------------------------------------------------

AugmentPipeline::AugmentPipeline(std::vector<Augmentation> steps, AugmentParams params)
    : steps_(std::move(steps)), params_(std::move(params)) {
  std::sort(steps_.begin(), steps_.end());
  steps_.erase(std::unique(steps_.begin(), steps_.end()), steps_.end());
}

AugmentPipeline AugmentPipeline::parse(std::string_view tags, AugmentParams params) {
  std::vector<Augmentation> steps;
  std::size_t pos = 0;
  while (pos <= tags.size()) {
    std::size_t end = tags.find(',', pos);
    if (end == std::string_view::npos) end = tags.size();
    std::string_view tag = tags.substr(pos, end - pos);
    while (!tag.empty() && tag.front() == ' ') tag.remove_prefix(1);
    while (!tag.empty() && tag.back() == ' ') tag.remove_suffix(1);
    if (tag == "rc") {
      steps.push_back(Augmentation::RC);
    } else if (tag == "rr") {
      steps.push_back(Augmentation::RR);
    } else if (tag == "rf") {
      steps.push_back(Augmentation::RF);
    } else if (tag == "re") {
      steps.push_back(Augmentation::RE);
    } else if (!(tag.empty() || tag == "none")) {
      throw ConfigError("unknown augmentation tag '" + std::string(tag) +
                        "' (expected rc, rr, rf, re)");
    }
    pos = end + 1;
  }
  return AugmentPipeline(std::move(steps), std::move(params));
}

std::string AugmentPipeline::str() const {
  if (steps_.empty()) return "none";
  std::string out;
  for (Augmentation a : steps_) {
    if (!out.empty()) out += ",";
    switch (a) {
      case Augmentation::RC: out += "rc"; break;
      case Augmentation::RR: out += "rr"; break;
      case Augmentation::RF: out += "rf"; break;
      case Augmentation::RE: out += "re"; break;
    }
  }
  return out;
}

Tensor AugmentPipeline::apply(const Tensor& img, std::uint64_t seed, std::uint64_t epoch,
                              std::uint64_t sample_index) const {
  if (steps_.empty()) return img;
  RngStream rng(seed, "augment", epoch, sample_index);
  Tensor out = img;
  for (Augmentation a : steps_) {
    switch (a) {
      case Augmentation::RC: out = random_crop(out, params_.crop_pad, rng); break;
      case Augmentation::RR: out = random_rotation(out, params_.max_degrees, rng); break;
      case Augmentation::RF: out = random_flip(out, params_.flip_p, rng); break;
      case Augmentation::RE: out = random_erasing(out, params_.erase, rng); break;
    }
  }
  return out;
}

Tensor AugmentPipeline::apply_batch(const Tensor& batch, std::uint64_t seed, std::uint64_t epoch,
                                    std::span<const std::uint64_t> sample_ids) const {
  if (steps_.empty()) return batch;
  const Shape& s = batch.shape();
  if (sample_ids.size() != s.n) throw InvalidArgument("apply_batch: one sample id per image");
  Tensor out(s);
  const auto count = static_cast<std::ptrdiff_t>(s.n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto n = static_cast<std::size_t>(i);
    Tensor aug = apply(batch.sample_tensor(n), seed, epoch, sample_ids[n]);
    std::copy(aug.data().begin(), aug.data().end(), out.sample(n).begin());
  }
  return out;
}

}  // namespace randpad
