#include "vocspace/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>

#include "vocspace/csv.hpp"
#include "vocspace/error.hpp"

namespace vocspace {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string bad_value(std::string_view key, std::string_view value) {
  return "invalid value '" + std::string(value) + "' for option " + std::string(key);
}

std::uint64_t to_unsigned(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw InputError(bad_value(key, value));
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  try {
    return csv::parse_double(value, key, 0);
  } catch (const InputError&) {
    throw InputError(bad_value(key, value));
  }
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw InputError(bad_value(key, value));
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string_view to_string(EmbedMethod m) { return m == EmbedMethod::Tsne ? "tsne" : "umap"; }

std::vector<VocalClass> parse_class_list(std::string_view list) {
  std::vector<VocalClass> out;
  for (auto token : csv::split(list, ',')) {
    token = trim(token);
    const auto c = parse_class_token(token);
    if (!c || *c == VocalClass::OTHER) {
      throw InputError("unknown class token '" + std::string(token) + "'");
    }
    if (std::find(out.begin(), out.end(), *c) == out.end()) out.push_back(*c);
  }
  if (out.empty()) throw InputError("empty class list");
  return out;
}

void set_option(PipelineConfig& c, std::string_view key, std::string_view raw) {
  const auto v = trim(raw);
  auto u = [&] { return to_unsigned(key, v); };
  auto d = [&] { return to_double(key, v); };
  auto i = [&] { return static_cast<int>(to_unsigned(key, v)); };
  if (key == "audio_dir") c.audio_dir = std::string(v);
  else if (key == "annotations") c.annotations = std::string(v);
  else if (key == "out_dir") c.out_dir = std::string(v);
  else if (key == "seed") c.seed = u();
  else if (key == "threads") c.threads = u();
  else if (key == "standardize") c.standardize = to_bool(key, v);
  else if (key == "grid_side") c.grid_side = u();
  else if (key == "method") {
    if (v == "umap") c.method = EmbedMethod::Umap;
    else if (v == "tsne") c.method = EmbedMethod::Tsne;
    else throw InputError(bad_value(key, v));
  } else if (key == "classes") c.classes = parse_class_list(v);
  else if (key == "min_clip_ms") c.window.min_ms = static_cast<std::int64_t>(u());
  else if (key == "max_clip_ms") c.window.max_ms = static_cast<std::int64_t>(u());
  else if (key == "frame_ms") c.frame.frame_ms = d();
  else if (key == "hop_ms") c.frame.hop_ms = d();
  else if (key == "n_mel_bands") c.frame.n_mel_bands = i();
  else if (key == "n_cepstra") c.frame.n_cepstra = i();
  else if (key == "pre_emphasis") c.frame.pre_emphasis = d();
  else if (key == "delta_window") c.frame.delta_window = i();
  else if (key == "n_neighbors") c.umap.n_neighbors = u();
  else if (key == "min_dist") c.umap.min_dist = d();
  else if (key == "umap_epochs") c.umap.n_epochs = u();
  else if (key == "umap_learning_rate") c.umap.learning_rate = d();
  else if (key == "negative_samples") c.umap.negative_samples = u();
  else if (key == "umap_init") {
    if (v == "spectral") c.umap.init = InitMethod::Spectral;
    else if (v == "random") c.umap.init = InitMethod::Random;
    else throw InputError(bad_value(key, v));
  } else if (key == "umap_dedup") c.umap.dedup = to_bool(key, v);
  else if (key == "umap_parallel") c.umap.parallel = to_bool(key, v);
  else if (key == "perplexity") c.tsne.perplexity = d();
  else if (key == "tsne_epochs") c.tsne.n_epochs = u();
  else if (key == "tsne_learning_rate") c.tsne.learning_rate = d();
  else if (key == "early_exaggeration") c.tsne.early_exaggeration = d();
  else throw InputError("unknown option '" + std::string(key) + "'");
}

void apply_config(PipelineConfig& config, std::istream& in, std::string_view origin) {
  std::string line;
  std::size_t line_no = 0;
  while (csv::read_line(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(std::string(origin) + ":" + std::to_string(line_no) +
                       ": expected key = value");
    }
    try {
      set_option(config, trim(s.substr(0, eq)), s.substr(eq + 1));
    } catch (const InputError& e) {
      throw InputError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(PipelineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  apply_config(config, in, path.string());
}

std::string canonical_config(const PipelineConfig& c) {
  std::map<std::string, std::string> kv;
  kv["audio_dir"] = c.audio_dir.string();
  kv["annotations"] = c.annotations.string();
  kv["seed"] = std::to_string(c.seed);
  kv["threads"] = std::to_string(c.threads);
  kv["standardize"] = bool_text(c.standardize);
  kv["grid_side"] = std::to_string(c.grid_side);
  kv["method"] = std::string(to_string(c.method));
  std::string classes;
  for (auto cls : c.classes) {
    if (!classes.empty()) classes += ',';
    classes += to_string(cls);
  }
  kv["classes"] = classes;
  kv["min_clip_ms"] = std::to_string(c.window.min_ms);
  kv["max_clip_ms"] = std::to_string(c.window.max_ms);
  kv["frame_ms"] = csv::format(c.frame.frame_ms);
  kv["hop_ms"] = csv::format(c.frame.hop_ms);
  kv["n_mel_bands"] = std::to_string(c.frame.n_mel_bands);
  kv["n_cepstra"] = std::to_string(c.frame.n_cepstra);
  kv["pre_emphasis"] = csv::format(c.frame.pre_emphasis);
  kv["delta_window"] = std::to_string(c.frame.delta_window);
  kv["n_neighbors"] = std::to_string(c.umap.n_neighbors);
  kv["min_dist"] = csv::format(c.umap.min_dist);
  kv["umap_epochs"] = std::to_string(c.umap.n_epochs);
  kv["umap_learning_rate"] = csv::format(c.umap.learning_rate);
  kv["negative_samples"] = std::to_string(c.umap.negative_samples);
  kv["umap_init"] = c.umap.init == InitMethod::Spectral ? "spectral" : "random";
  kv["umap_dedup"] = bool_text(c.umap.dedup);
  kv["umap_parallel"] = bool_text(c.umap.parallel);
  kv["perplexity"] = csv::format(c.tsne.perplexity);
  kv["tsne_epochs"] = std::to_string(c.tsne.n_epochs);
  kv["tsne_learning_rate"] = csv::format(c.tsne.learning_rate);
  kv["early_exaggeration"] = csv::format(c.tsne.early_exaggeration);
  std::string out;
  for (const auto& [k, v] : kv) out += k + '=' + v + '\n';
  return out;
}

std::string config_hash(const PipelineConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vocspace
