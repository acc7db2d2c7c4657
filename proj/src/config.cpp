#include "randpad/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "randpad/augment.hpp"
#include "randpad/error.hpp"

namespace randpad {

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "fashion-mnist") return DatasetKind::fashion_mnist;
  if (name == "cifar10") return DatasetKind::cifar10;
  if (name == "cifar100") return DatasetKind::cifar100;
  throw ConfigError("unknown dataset '" + std::string(name) +
                    "' (expected fashion-mnist, cifar10 or cifar100)");
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::fashion_mnist: return "fashion-mnist";
    case DatasetKind::cifar10: return "cifar10";
    case DatasetKind::cifar100: return "cifar100";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
    throw ConfigError("key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view key, std::string_view text) {
  return parse_number<std::size_t>(key, text);
}

std::size_t parse_positive(std::string_view key, std::string_view text) {
  const std::size_t v = parse_count(key, text);
  if (v == 0) throw ConfigError("key '" + std::string(key) + "' must be >= 1");
  return v;
}

double parse_probability(std::string_view key, std::string_view text) {
  const double v = parse_number<double>(key, text);
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ConfigError("key '" + std::string(key) + "' must lie in [0, 1]");
  }
  return v;
}

float parse_nonneg_float(std::string_view key, std::string_view text) {
  const float v = parse_number<float>(key, text);
  if (!(v >= 0.0f)) throw ConfigError("key '" + std::string(key) + "' must be >= 0");
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true or false, got '" +
                    std::string(text) + "'");
}

template <typename T>
std::string num(T v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + fmt(items[i]);
  return out;
}

// Rethrows library parse errors as ConfigError naming the key.
template <typename F>
auto as_config(std::string_view key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("key '" + std::string(key) + "': " + e.what());
  }
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"dataset", [](RunConfig& c, std::string_view v) { c.dataset = parse_dataset_kind(v); },
       [](const RunConfig& c) { return to_string(c.dataset); }},
      {"data_dir", [](RunConfig& c, std::string_view v) { c.data_dir = std::string(v); },
       [](const RunConfig& c) { return c.data_dir.string(); }},
      {"train_subset", [](RunConfig& c, std::string_view v) { c.train_subset = parse_count("train_subset", v); },
       [](const RunConfig& c) { return num(c.train_subset); }},
      {"test_subset", [](RunConfig& c, std::string_view v) { c.test_subset = parse_count("test_subset", v); },
       [](const RunConfig& c) { return num(c.test_subset); }},
      {"arch",
       [](RunConfig& c, std::string_view v) {
         c.arch = as_config("arch", [&] { return parse_architecture(v); });
       },
       [](const RunConfig& c) { return to_string(c.arch); }},
      {"rp_layers", [](RunConfig& c, std::string_view v) { c.rp_layers = parse_count("rp_layers", v); },
       [](const RunConfig& c) { return num(c.rp_layers); }},
      {"width", [](RunConfig& c, std::string_view v) { c.width = parse_positive("width", v); },
       [](const RunConfig& c) { return num(c.width); }},
      {"augment",
       [](RunConfig& c, std::string_view v) {
         c.augment = AugmentPipeline::parse(v).str();
       },
       [](const RunConfig& c) { return c.augment; }},
      {"crop_pad", [](RunConfig& c, std::string_view v) { c.crop_pad = parse_count("crop_pad", v); },
       [](const RunConfig& c) { return num(c.crop_pad); }},
      {"flip_p", [](RunConfig& c, std::string_view v) { c.flip_p = parse_probability("flip_p", v); },
       [](const RunConfig& c) { return num(c.flip_p); }},
      {"max_degrees",
       [](RunConfig& c, std::string_view v) {
         c.max_degrees = parse_number<double>("max_degrees", v);
         if (!(c.max_degrees >= 0.0 && c.max_degrees <= 180.0)) {
           throw ConfigError("key 'max_degrees' must lie in [0, 180]");
         }
       },
       [](const RunConfig& c) { return num(c.max_degrees); }},
      {"erase_p", [](RunConfig& c, std::string_view v) { c.erase_p = parse_probability("erase_p", v); },
       [](const RunConfig& c) { return num(c.erase_p); }},
      {"lr", [](RunConfig& c, std::string_view v) { c.lr = parse_nonneg_float("lr", v); },
       [](const RunConfig& c) { return num(c.lr); }},
      {"momentum",
       [](RunConfig& c, std::string_view v) {
         c.momentum = static_cast<float>(parse_probability("momentum", v));
       },
       [](const RunConfig& c) { return num(c.momentum); }},
      {"weight_decay", [](RunConfig& c, std::string_view v) { c.weight_decay = parse_nonneg_float("weight_decay", v); },
       [](const RunConfig& c) { return num(c.weight_decay); }},
      {"epochs", [](RunConfig& c, std::string_view v) { c.epochs = parse_positive("epochs", v); },
       [](const RunConfig& c) { return num(c.epochs); }},
      {"batch_size", [](RunConfig& c, std::string_view v) { c.batch_size = parse_positive("batch_size", v); },
       [](const RunConfig& c) { return num(c.batch_size); }},
      {"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>("seed", v); },
       [](const RunConfig& c) { return num(c.seed); }},
      {"seeds", [](RunConfig& c, std::string_view v) { c.seeds = parse_positive("seeds", v); },
       [](const RunConfig& c) { return num(c.seeds); }},
      {"checkpoint", [](RunConfig& c, std::string_view v) { c.checkpoint = std::string(v); },
       [](const RunConfig& c) { return c.checkpoint.string(); }},
      {"encoders",
       [](RunConfig& c, std::string_view v) {
         c.encoders.clear();
         for (auto item : split_list(v)) {
           const auto a = item.find(':');
           const auto b = a == std::string_view::npos ? a : item.find(':', a + 1);
           if (b == std::string_view::npos || a == 0 || b == a + 1 || b + 1 == item.size()) {
             throw ConfigError("key 'encoders': expected id:padding:path, got '" +
                               std::string(item) + "'");
           }
           c.encoders.push_back({std::string(item.substr(0, a)),
                                 std::string(item.substr(a + 1, b - a - 1)),
                                 std::string(item.substr(b + 1))});
         }
       },
       [](const RunConfig& c) {
         return join(c.encoders, [](const EncoderSpec& e) {
           return e.id + ":" + e.padding + ":" + e.checkpoint.string();
         });
       }},
      {"probe_baseline", [](RunConfig& c, std::string_view v) { c.probe_baseline = parse_bool("probe_baseline", v); },
       [](const RunConfig& c) { return std::string(c.probe_baseline ? "true" : "false"); }},
      {"probe_resize",
       [](RunConfig& c, std::string_view v) {
         c.probe_resize = parse_count("probe_resize", v);
         if (c.probe_resize < 3) throw ConfigError("key 'probe_resize' must be >= 3");
       },
       [](const RunConfig& c) { return num(c.probe_resize); }},
      {"probe_epochs", [](RunConfig& c, std::string_view v) { c.probe_epochs = parse_positive("probe_epochs", v); },
       [](const RunConfig& c) { return num(c.probe_epochs); }},
      {"probe_lr", [](RunConfig& c, std::string_view v) { c.probe_lr = parse_nonneg_float("probe_lr", v); },
       [](const RunConfig& c) { return num(c.probe_lr); }},
      {"probe_momentum",
       [](RunConfig& c, std::string_view v) {
         c.probe_momentum = static_cast<float>(parse_probability("probe_momentum", v));
       },
       [](const RunConfig& c) { return num(c.probe_momentum); }},
      {"probe_weight_decay",
       [](RunConfig& c, std::string_view v) { c.probe_weight_decay = parse_nonneg_float("probe_weight_decay", v); },
       [](const RunConfig& c) { return num(c.probe_weight_decay); }},
      {"probe_batch_size",
       [](RunConfig& c, std::string_view v) { c.probe_batch_size = parse_positive("probe_batch_size", v); },
       [](const RunConfig& c) { return num(c.probe_batch_size); }},
      {"probe_patterns",
       [](RunConfig& c, std::string_view v) {
         c.probe_patterns.clear();
         for (auto item : split_list(v)) {
           c.probe_patterns.push_back(as_config("probe_patterns", [&] { return parse_pattern_kind(item); }));
         }
         if (c.probe_patterns.empty()) throw ConfigError("key 'probe_patterns' is empty");
       },
       [](const RunConfig& c) {
         return join(c.probe_patterns, [](PatternKind k) { return to_string(k); });
       }},
      {"probe_inputs",
       [](RunConfig& c, std::string_view v) {
         c.probe_inputs.clear();
         for (auto item : split_list(v)) {
           c.probe_inputs.push_back(as_config("probe_inputs", [&] { return parse_probe_input(item); }));
         }
         if (c.probe_inputs.empty()) throw ConfigError("key 'probe_inputs' is empty");
       },
       [](const RunConfig& c) {
         return join(c.probe_inputs, [](ProbeInput k) { return to_string(k); });
       }},
      {"probe_train_images",
       [](RunConfig& c, std::string_view v) { c.probe_train_images = parse_positive("probe_train_images", v); },
       [](const RunConfig& c) { return num(c.probe_train_images); }},
      {"probe_test_images",
       [](RunConfig& c, std::string_view v) { c.probe_test_images = parse_positive("probe_test_images", v); },
       [](const RunConfig& c) { return num(c.probe_test_images); }},
      {"dump_maps", [](RunConfig& c, std::string_view v) { c.dump_maps = parse_bool("dump_maps", v); },
       [](const RunConfig& c) { return std::string(c.dump_maps ? "true" : "false"); }},
      {"probe_random_padding",
       [](RunConfig& c, std::string_view v) {
         c.probe_random_padding = parse_bool("probe_random_padding", v);
       },
       [](const RunConfig& c) { return std::string(c.probe_random_padding ? "true" : "false"); }},
      {"preset",
       [](RunConfig& c, std::string_view v) {
         if (v != "table1-desk" && v != "table2-desk" && v != "table3-desk" && !v.empty()) {
           throw ConfigError("unknown preset '" + std::string(v) +
                             "' (expected table1-desk, table2-desk or table3-desk)");
         }
         c.preset = std::string(v);
       },
       [](const RunConfig& c) { return c.preset; }},
      {"archs",
       [](RunConfig& c, std::string_view v) {
         c.archs.clear();
         for (auto item : split_list(v)) {
           c.archs.push_back(as_config("archs", [&] { return parse_architecture(item); }));
         }
         if (c.archs.empty()) throw ConfigError("key 'archs' is empty");
       },
       [](const RunConfig& c) {
         return join(c.archs, [](Architecture a) { return to_string(a); });
       }},
      {"encoder_rp_layers",
       [](RunConfig& c, std::string_view v) { c.encoder_rp_layers = parse_count("encoder_rp_layers", v); },
       [](const RunConfig& c) { return num(c.encoder_rp_layers); }},
  };
  return table;
}

}  // namespace

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  for (const Key& k : keys()) {
    if (key == k.name) {
      as_config(key, [&] {
        k.set(cfg, trim(value));
        return 0;
      });
      return;
    }
  }
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, std::string_view origin) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::vector<std::string> seen;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      throw ConfigError(where + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
    seen.push_back(key);
    try {
      set_config_value(cfg, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.string());
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected key=value");
    try {
      set_config_value(cfg, trim(std::string_view(o).substr(0, eq)), std::string_view(o).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("override '" + o + "': " + e.what());
    }
  }
}

std::vector<std::pair<std::string, std::string>> effective_values(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Key& k : keys()) out.emplace_back(k.name, k.get(cfg));
  return out;
}

std::string to_config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : effective_values(cfg)) out += k + " = " + v + "\n";
  return out;
}

ModelConfig model_config(const RunConfig& cfg, Architecture arch, std::size_t rp_layers,
                         std::size_t classes, const Shape& image_shape, std::uint64_t seed) {
  ModelConfig m;
  m.arch = arch;
  m.rp_layers = rp_layers;
  m.classes = classes;
  m.in_channels = image_shape.c;
  m.in_h = image_shape.h;
  m.in_w = image_shape.w;
  m.width = cfg.width;
  m.init_seed = seed;
  return m;
}

DataSplits load_splits(const RunConfig& cfg, Architecture arch) {
  if (cfg.data_dir.empty()) throw ConfigError("key 'data_dir' is required");
  LabeledDataset train;
  LabeledDataset test;
  switch (cfg.dataset) {
    case DatasetKind::fashion_mnist:
      train = load_fashion_mnist(cfg.data_dir, Split::train);
      test = load_fashion_mnist(cfg.data_dir, Split::test);
      break;
    case DatasetKind::cifar10:
    case DatasetKind::cifar100: {
      const auto v = cfg.dataset == DatasetKind::cifar10 ? CifarVariant::c10 : CifarVariant::c100;
      train = load_cifar(cfg.data_dir, v, Split::train);
      test = load_cifar(cfg.data_dir, v, Split::test);
      break;
    }
  }
  if (cfg.train_subset > 0) train = take_first(train, cfg.train_subset);
  if (cfg.test_subset > 0) test = take_first(test, cfg.test_subset);
  const std::size_t multiple = spatial_multiple(arch);
  train = pad_to_multiple(train, multiple);
  test = pad_to_multiple(test, multiple);
  DataSplits out;
  out.train = normalize(std::move(train));
  out.test = normalize(std::move(test), out.train.normalization);
  return out;
}

}  // namespace randpad
