#include "randpad/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "randpad/error.hpp"

namespace randpad {

std::string format_fixed(double v, int decimals) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  // Avoid "-0.000000".
  if (v == 0.0) v = 0.0;
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  std::string s(buf, r.ptr);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::string probe_csv_row(const ProbeResult& r) {
  return r.encoder_id + "," + r.padding + "," + r.pattern + "," + r.input_kind + "," +
         format_fixed(r.spc) + "," + format_fixed(r.mae) + "," + std::to_string(r.seed);
}

std::vector<std::uint8_t> encode_pgm(const Tensor& map) {
  const Shape& s = map.shape();
  if (s.n != 1 || s.c != 1 || s.h == 0 || s.w == 0) {
    throw InvalidArgument("encode_pgm: expected a single map, got " + s.str());
  }
  const std::string header = "P5\n" + std::to_string(s.w) + " " + std::to_string(s.h) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const auto [lo_it, hi_it] = std::minmax_element(map.data().begin(), map.data().end());
  const double lo = *lo_it;
  const double range = static_cast<double>(*hi_it) - lo;
  for (float v : map.data()) {
    const double t = range > 0.0 ? (v - lo) / range : 0.5;
    out.push_back(static_cast<std::uint8_t>(std::lround(t * 255.0)));
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const Tensor& map) {
  const auto bytes = encode_pgm(map);
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot write " + path.string());
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!f) throw FormatError("failed writing " + path.string());
}

void prepare_output_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw ConfigError("output path " + dir.string() + " is not a directory");
    if (!fs::is_empty(dir, ec)) {
      throw ConfigError("output directory " + dir.string() + " is not empty; refusing to overwrite");
    }
    return;
  }
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

}  // namespace randpad
