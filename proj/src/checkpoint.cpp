#include "randpad/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "randpad/error.hpp"

namespace randpad {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError("checkpoint truncated at offset " + std::to_string(pos_) + " reading " +
                        what + " (need " + std::to_string(n) + " bytes, have " +
                        std::to_string(bytes_.size() - pos_) + ")");
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint32_t u32(const char* what) {
    auto s = take(4, what);
    return static_cast<std::uint32_t>(s[0]) | static_cast<std::uint32_t>(s[1]) << 8 |
           static_cast<std::uint32_t>(s[2]) << 16 | static_cast<std::uint32_t>(s[3]) << 24;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::string dims_str(const std::vector<std::uint32_t>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
  return s + "]";
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(Model& model) {
  const auto params = model.state();
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    put_u32(out, static_cast<std::uint32_t>(p->name.size()));
    out.insert(out.end(), p->name.begin(), p->name.end());
    put_u32(out, static_cast<std::uint32_t>(p->dims.size()));
    for (std::uint32_t d : p->dims) put_u32(out, d);
    for (float v : p->value.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

void deserialize_checkpoint(std::span<const std::uint8_t> bytes, Model& model) {
  Reader r(bytes);
  auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kCheckpointMagic, 4) != 0) {
    throw FormatError("checkpoint bad magic at offset 0 (expected \"RPLB\")");
  }
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint unsupported version " + std::to_string(version) +
                      " at offset " + std::to_string(version_at));
  }
  const std::uint32_t count = r.u32("parameter count");
  const auto params = model.state();
  // Decode into scratch first so a bad file leaves the model untouched.
  std::vector<std::vector<float>> values(params.size());
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t entry_at = r.offset();
    const std::uint32_t name_len = r.u32("name length");
    auto name_bytes = r.take(name_len, "name");
    const std::string name(name_bytes.begin(), name_bytes.end());
    const std::uint32_t rank = r.u32("rank");
    if (rank > 8) {
      throw FormatError("checkpoint tensor '" + name + "' at offset " + std::to_string(entry_at) +
                        " has implausible rank " + std::to_string(rank));
    }
    std::vector<std::uint32_t> dims(rank);
    for (auto& d : dims) d = r.u32("extent");
    if (i >= params.size()) {
      throw FormatError("checkpoint shape mismatch at offset " + std::to_string(entry_at) +
                        ": file has extra tensor '" + name + "' " + dims_str(dims) +
                        ", model has only " + std::to_string(params.size()));
    }
    const Parameter& p = *params[i];
    if (name != p.name || dims != p.dims) {
      throw FormatError("checkpoint shape mismatch at offset " + std::to_string(entry_at) +
                        ": file has '" + name + "' " + dims_str(dims) + ", model expects '" +
                        p.name + "' " + dims_str(p.dims));
    }
    auto raw = r.take(p.value.numel() * 4, "values");
    values[i].resize(p.value.numel());
    std::memcpy(values[i].data(), raw.data(), raw.size());
  }
  if (count < params.size()) {
    throw FormatError("checkpoint shape mismatch at offset " + std::to_string(r.offset()) +
                      ": file ends after " + std::to_string(count) + " tensors, model expects '" +
                      params[count]->name + "' next");
  }
  if (!r.done()) {
    throw FormatError("checkpoint has trailing bytes at offset " + std::to_string(r.offset()));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    auto dst = params[i]->value.data();
    std::copy(values[i].begin(), values[i].end(), dst.begin());
    params[i]->zero_grad();
  }
}

void save_checkpoint(Model& model, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(model);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot write checkpoint " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("failed writing checkpoint " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, Model& model) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  deserialize_checkpoint(bytes, model);
}

}  // namespace randpad
