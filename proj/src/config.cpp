#include "wamim/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "wamim/errors.hpp"

namespace wamim {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt_double(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

class Fields {
 public:
  explicit Fields(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError("key '" + section + "' must live inside a [section]");
      }
      for (const auto& [key, value] : body) values_[section + "." + key] = trim(value.data());
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& raw(const std::string& key) {
    used_.insert(key);
    return values_.at(key);
  }

  void u64(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const std::string& s = raw(key);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || p != s.data() + s.size()) bad(key, "an unsigned integer");
  }

  void size(const std::string& key, std::size_t& out) {
    std::uint64_t v = out;
    u64(key, v);
    out = static_cast<std::size_t>(v);
  }

  void real(const std::string& key, double& out) {
    if (!has(key)) return;
    const std::string& s = raw(key);
    try {
      std::size_t used = 0;
      out = std::stod(s, &used);
      if (used != s.size()) bad(key, "a real number");
    } catch (const std::logic_error&) {
      bad(key, "a real number");
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const std::string& s = raw(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
      out = true;
    } else if (s == "false" || s == "0" || s == "no" || s == "off") {
      out = false;
    } else {
      bad(key, "a boolean");
    }
  }

  void text(const std::string& key, std::string& out) {
    if (has(key)) out = raw(key);
  }

  void sizes(const std::string& key, std::vector<std::size_t>& out) {
    if (!has(key)) return;
    out.clear();
    for (const auto& item : split(raw(key))) {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || p != item.data() + item.size()) bad(key, "a list of integers");
      out.push_back(static_cast<std::size_t>(v));
    }
  }

  void reals(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    out.clear();
    for (const auto& item : split(raw(key))) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) bad(key, "a list of reals");
      } catch (const std::logic_error&) {
        bad(key, "a list of reals");
      }
    }
  }

  void reject_unknown() const {
    for (const auto& [key, _] : values_) {
      if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  [[noreturn]] static void bad(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "' must be " + what);
  }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError(key + ": " + why);
  };
  if (source.empty()) fail("data.source", "must name 'synthetic' or an image directory");
  if (source == "synthetic" && synthetic_count == 0) fail("data.synthetic_count", "must be positive");
  if (channels == 0) fail("data.channels", "must be positive");
  if (!(crop_min_scale > 0.0 && crop_min_scale <= 1.0)) {
    fail("data.crop_min_scale", "must lie in (0, 1]");
  }
  if (levels == 0) fail("wavelet.levels", "must be at least 1");
  if (levels >= 32 || image_side % (std::size_t{1} << levels) != 0) {
    fail("wavelet.levels", "image side " + std::to_string(image_side) +
                               " must be divisible by 2^levels");
  }
  if (!(norm_epsilon > 0.0)) fail("wavelet.norm_epsilon", "must be positive");
  if (!(mask_ratio > 0.0 && mask_ratio < 1.0)) fail("mask.ratio", "must lie in (0, 1)");
  if (patch == 0 || image_side % patch != 0) {
    fail("model.patch", "must divide data.image_side");
  }
  const std::size_t g = grid();
  if (mask_block == 0 || mask_block > g) fail("mask.block", "must lie in 1..grid");
  const std::size_t masked = mask_target_count(g, mask_ratio);
  if (masked == 0 || masked == g * g) fail("mask.ratio", "masks nothing or everything");

  try {
    level_selection().validate(levels, depth);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("wavelet.selected_levels / model.taps / loss.weights: ") +
                      e.what());
  }
  model_config().validate();

  if (!(base_lr > 0.0)) fail("optim.base_lr", "must be positive");
  if (!(lr_reference_batch > 0.0)) fail("optim.lr_reference_batch", "must be positive");
  if (!(weight_decay >= 0.0)) fail("optim.weight_decay", "must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("optim.beta1", "must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("optim.beta2", "must lie in [0, 1)");
  if (!(eps > 0.0)) fail("optim.eps", "must be positive");
  if (batch_size == 0) fail("train.batch_size", "must be positive");
  if (steps > 0 && warmup_steps > steps) fail("optim.warmup_steps", "exceeds train.steps");
}

LevelSelection RunConfig::level_selection() const {
  return LevelSelection{selected_levels, taps, weights, attach_approximation};
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.image_side = image_side;
  m.channels = channels;
  m.patch = patch;
  m.depth = depth;
  m.width = width;
  m.heads = heads;
  m.decoder_width = decoder_width;
  m.decoder_heads = decoder_heads;
  m.mlp_ratio = mlp_ratio;
  m.taps = taps;
  m.levels = target_geometry(image_side, channels, level_selection());
  return m;
}

double RunConfig::peak_lr() const {
  return base_lr * static_cast<double>(batch_size) / lr_reference_batch;
}

std::string RunConfig::to_ini() const {
  std::ostringstream o;
  auto b = [](bool v) { return v ? "true" : "false"; };
  o << "[data]\n"
    << "source = " << source << "\n"
    << "synthetic_count = " << synthetic_count << "\n"
    << "image_side = " << image_side << "\n"
    << "channels = " << channels << "\n"
    << "augment = " << b(augment) << "\n"
    << "crop_min_scale = " << fmt_double(crop_min_scale) << "\n\n"
    << "[wavelet]\n"
    << "levels = " << levels << "\n"
    << "selected_levels = " << join(selected_levels) << "\n"
    << "attach_approximation = " << b(attach_approximation) << "\n"
    << "normalize = " << b(normalize) << "\n"
    << "norm_epsilon = " << fmt_double(norm_epsilon) << "\n\n"
    << "[mask]\n"
    << "ratio = " << fmt_double(mask_ratio) << "\n"
    << "block = " << mask_block << "\n\n"
    << "[model]\n"
    << "patch = " << patch << "\n"
    << "depth = " << depth << "\n"
    << "width = " << width << "\n"
    << "heads = " << heads << "\n"
    << "decoder_width = " << decoder_width << "\n"
    << "decoder_heads = " << decoder_heads << "\n"
    << "mlp_ratio = " << mlp_ratio << "\n"
    << "taps = " << join(taps) << "\n\n"
    << "[loss]\n"
    << "metric = " << metric_name(metric) << "\n"
    << "weights = " << join(weights) << "\n\n"
    << "[optim]\n"
    << "base_lr = " << fmt_double(base_lr) << "\n"
    << "lr_reference_batch = " << fmt_double(lr_reference_batch) << "\n"
    << "weight_decay = " << fmt_double(weight_decay) << "\n"
    << "beta1 = " << fmt_double(beta1) << "\n"
    << "beta2 = " << fmt_double(beta2) << "\n"
    << "eps = " << fmt_double(eps) << "\n"
    << "warmup_steps = " << warmup_steps << "\n\n"
    << "[train]\n"
    << "steps = " << steps << "\n"
    << "batch_size = " << batch_size << "\n"
    << "checkpoint_every = " << checkpoint_every << "\n"
    << "seed = " << seed << "\n";
  return o.str();
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_ini()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  Fields f(tree);
  RunConfig c;
  f.text("data.source", c.source);
  f.size("data.synthetic_count", c.synthetic_count);
  f.size("data.image_side", c.image_side);
  f.size("data.channels", c.channels);
  f.boolean("data.augment", c.augment);
  f.real("data.crop_min_scale", c.crop_min_scale);
  f.size("wavelet.levels", c.levels);
  f.sizes("wavelet.selected_levels", c.selected_levels);
  f.boolean("wavelet.attach_approximation", c.attach_approximation);
  f.boolean("wavelet.normalize", c.normalize);
  f.real("wavelet.norm_epsilon", c.norm_epsilon);
  f.real("mask.ratio", c.mask_ratio);
  f.size("mask.block", c.mask_block);
  f.size("model.patch", c.patch);
  f.size("model.depth", c.depth);
  f.size("model.width", c.width);
  f.size("model.heads", c.heads);
  f.size("model.decoder_width", c.decoder_width);
  f.size("model.decoder_heads", c.decoder_heads);
  f.size("model.mlp_ratio", c.mlp_ratio);
  f.sizes("model.taps", c.taps);
  if (f.has("loss.metric")) c.metric = parse_metric(f.raw("loss.metric"));
  f.reals("loss.weights", c.weights);
  f.real("optim.base_lr", c.base_lr);
  f.real("optim.lr_reference_batch", c.lr_reference_batch);
  f.real("optim.weight_decay", c.weight_decay);
  f.real("optim.beta1", c.beta1);
  f.real("optim.beta2", c.beta2);
  f.real("optim.eps", c.eps);
  f.size("optim.warmup_steps", c.warmup_steps);
  f.size("train.steps", c.steps);
  f.size("train.batch_size", c.batch_size);
  f.size("train.checkpoint_every", c.checkpoint_every);
  f.u64("train.seed", c.seed);
  f.reject_unknown();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace wamim
