#include "eoc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "eoc/csv.hpp"
#include "eoc/error.hpp"

namespace eoc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    return csv::parse_number(v);
  } catch (const IoError&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") {
    return true;
  }
  if (v == "false" || v == "0") {
    return false;
  }
  throw ConfigError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
std::string num(T v) {
  if constexpr (std::is_floating_point_v<T>) {
    return csv::format_number(v);
  } else {
    return std::to_string(v);
  }
}

#define EOC_INT_FIELD(name, member)                                                        \
  Field {                                                                                  \
    name,                                                                                  \
        [](RunConfig& c, const std::string& v) {                                           \
          c.member = parse_int<std::remove_reference_t<decltype(c.member)>>(name, v);      \
        },                                                                                 \
        [](const RunConfig& c) { return num(c.member); }                                   \
  }
#define EOC_REAL_FIELD(name, member)                                                                  \
  Field {                                                                                             \
    name, [](RunConfig& c, const std::string& v) { c.member = parse_real(name, v); },               \
        [](const RunConfig& c) { return num(c.member); }                                              \
  }
#define EOC_STR_FIELD(name, member)                                                  \
  Field {                                                                            \
    name, [](RunConfig& c, const std::string& v) { c.member = v; },                \
        [](const RunConfig& c) { return c.member; }                                  \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      EOC_STR_FIELD("mode", mode),
      EOC_INT_FIELD("seed", seed),
      EOC_STR_FIELD("out_dir", out_dir),
      EOC_INT_FIELD("threads", threads),
      EOC_STR_FIELD("corpus.source", corpus_source),
      EOC_STR_FIELD("corpus.imdb_path", imdb_path),
      EOC_INT_FIELD("corpus.n_reviews", synth.n_reviews),
      EOC_INT_FIELD("corpus.vocab_size", synth.vocab_size),
      EOC_INT_FIELD("corpus.min_length", synth.min_length),
      EOC_INT_FIELD("corpus.max_length", synth.max_length),
      EOC_REAL_FIELD("corpus.signal_strength", synth.signal_strength),
      EOC_REAL_FIELD("corpus.marker_rate", synth.marker_rate),
      EOC_INT_FIELD("corpus.max_vocab", max_vocab),
      EOC_INT_FIELD("corpus.seq_len", seq_len),
      EOC_REAL_FIELD("corpus.train_fraction", train_fraction),
      EOC_INT_FIELD("model.embed_dim", embed_dim),
      EOC_INT_FIELD("model.hidden_dim", hidden_dim),
      EOC_REAL_FIELD("train.lr", lr),
      EOC_INT_FIELD("train.batch_size", batch_size),
      EOC_INT_FIELD("train.epochs", epochs),
      EOC_REAL_FIELD("train.embed_init_scale", embed_init_scale),
      Field{"probe.enabled",
            [](RunConfig& c, const std::string& v) { c.probe_enabled = parse_bool("probe.enabled", v); },
            [](const RunConfig& c) { return std::string(c.probe_enabled ? "true" : "false"); }},
      EOC_REAL_FIELD("probe.sigma", probe_sigma),
      EOC_INT_FIELD("probe.t_total", probe_t_total),
      EOC_INT_FIELD("probe.n_samples", probe_n_samples),
      EOC_REAL_FIELD("probe.floor_ln", floor_ln),
      EOC_REAL_FIELD("analysis.order_threshold", analysis.order_threshold),
      EOC_REAL_FIELD("analysis.attractor_drop", analysis.attractor_drop),
      EOC_INT_FIELD("analysis.min_rise_epochs", analysis.min_rise_epochs),
      EOC_REAL_FIELD("analysis.drop_fraction", analysis.drop_fraction),
      EOC_INT_FIELD("analysis.align_tolerance", analysis.align_tolerance),
  };
  return table;
}

#undef EOC_INT_FIELD
#undef EOC_REAL_FIELD
#undef EOC_STR_FIELD

}  // namespace

probe::ProbeConfig RunConfig::probe_config() const {
  probe::ProbeConfig p;
  p.sigma = probe_sigma;
  p.t_total = probe_t_total;
  p.l_real = seq_len;
  p.floor_ln = floor_ln;
  p.n_samples = probe_n_samples;
  p.master_seed = seed;
  p.threads = threads;
  return p;
}

void RunConfig::validate() const {
  if (mode != "train_probe") {
    throw ConfigError("config: mode must be train_probe for training runs");
  }
  if (corpus_source != "synthetic" && corpus_source != "imdb") {
    throw ConfigError("config: corpus.source must be synthetic or imdb");
  }
  if (corpus_source == "imdb" && imdb_path.empty()) {
    throw ConfigError("config: corpus.imdb_path is required when corpus.source = imdb");
  }
  if (seq_len < 1 || embed_dim < 1 || hidden_dim < 1) {
    throw ConfigError("config: seq_len, embed_dim and hidden_dim must be >= 1");
  }
  if (max_vocab < 3) {
    throw ConfigError("config: corpus.max_vocab must be >= 3");
  }
  if (batch_size < 1 || epochs < 0 || !(lr >= 0.0)) {
    throw ConfigError("config: need batch_size >= 1, epochs >= 0, lr >= 0");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("config: corpus.train_fraction must be in (0, 1)");
  }
  if (probe_enabled) {
    probe_config().validate();
  }
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "desk") {
    return c;
  }
  if (name == "paper") {
    c.corpus_source = "imdb";
    c.max_vocab = 10000;
    c.seq_len = 500;
    c.embed_dim = 32;
    c.hidden_dim = 60;
    c.lr = 0.0005;
    c.epochs = 10000;
    c.probe_t_total = 1600;
    c.probe_n_samples = 500;
    return c;
  }
  throw ConfigError("config: unknown preset '" + name + "' (expected desk or paper)");
}

RunConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::string preset = "desk";
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key == "preset") {
      preset = value;
    } else {
      entries.emplace_back(std::move(key), std::move(value));
    }
  }
  RunConfig c = preset_config(preset);
  for (const auto& [key, value] : entries) {
    bool known = false;
    for (const Field& f : fields()) {
      if (f.key == key) {
        f.set(c, value);
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("config: cannot open '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_text(const RunConfig& c) {
  std::ostringstream out;
  out << "preset = " << c.preset << '\n';
  for (const Field& f : fields()) {
    out << f.key << " = " << f.get(c) << '\n';
  }
  return out.str();
}

}  // namespace eoc
