#include "hateclf/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "hateclf/error.hpp"

namespace hateclf {

namespace fs = std::filesystem;

std::string_view to_string(Task task) {
  switch (task) {
    case Task::Binary: return "binary";
    case Task::FineDirect: return "fine_direct";
    case Task::FineHierarchical: return "fine_hierarchical";
  }
  return "binary";
}

Task task_from_string(std::string_view name) {
  std::string n(name);
  for (auto& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (n == "binary") return Task::Binary;
  if (n == "fine_direct" || n == "direct") return Task::FineDirect;
  if (n == "fine_hierarchical" || n == "hierarchical") return Task::FineHierarchical;
  throw Error(ErrorKind::Config, "unknown task '" + std::string(name) +
                                     "' (binary, fine_direct, fine_hierarchical)");
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig t = TrainConfig::defaults_for(architecture);
  if (learning_rate) t.learning_rate = *learning_rate;
  if (max_epochs) t.max_epochs = *max_epochs;
  t.batch_size = batch_size;
  t.seed = derive_seed(seed, "train");
  t.oversample_minority = oversample_minority;
  return t;
}

const LabelScheme& ExperimentConfig::scheme() const {
  static const LabelScheme binary = LabelScheme::binary();
  static const LabelScheme fine = LabelScheme::fine();
  return task == Task::Binary ? binary : fine;
}

const std::string& ExperimentConfig::label_column() const {
  return task == Task::Binary ? columns.binary : columns.fine;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw Error(ErrorKind::Config, key + ": '" + v + "' is not a valid number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  std::string n = v;
  for (auto& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (n == "true" || n == "yes" || n == "1" || n == "on") return true;
  if (n == "false" || n == "no" || n == "0" || n == "off") return false;
  throw Error(ErrorKind::Config, key + ": '" + v + "' is not a boolean");
}

template <typename T>
std::string fmt_real(T v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  using C = ExperimentConfig;
  static const std::map<std::string, Setter> table = {
      {"task", [](C& c, auto&, auto& v) { c.task = task_from_string(v); }},
      {"train", [](C& c, auto&, auto& v) { c.train_path = v; }},
      {"test",
       [](C& c, auto&, auto& v) {
         if (v.empty()) {
           c.test_path.reset();
         } else {
           c.test_path = v;
         }
       }},
      {"id_column", [](C& c, auto&, auto& v) { c.columns.id = v; }},
      {"text_column", [](C& c, auto&, auto& v) { c.columns.text = v; }},
      {"binary_column", [](C& c, auto&, auto& v) { c.columns.binary = v; }},
      {"fine_column", [](C& c, auto&, auto& v) { c.columns.fine = v; }},
      {"val_fraction", [](C& c, auto& k, auto& v) { c.val_fraction = parse_number<double>(k, v); }},
      {"architecture", [](C& c, auto&, auto& v) { c.architecture = architecture_from_string(v); }},
      {"embedding",
       [](C& c, auto&, auto& v) { c.embedding_mode = embedding_mode_from_string(v); }},
      {"vectors",
       [](C& c, auto&, auto& v) {
         if (v.empty()) {
           c.vectors_path.reset();
         } else {
           c.vectors_path = v;
         }
       }},
      {"embedding_dim",
       [](C& c, auto& k, auto& v) { c.embedding_dim = parse_number<std::size_t>(k, v); }},
      {"min_freq", [](C& c, auto& k, auto& v) { c.min_freq = parse_number<std::size_t>(k, v); }},
      {"checkpoint", [](C& c, auto&, auto& v) { c.checkpoint = v; }},
      {"max_len", [](C& c, auto& k, auto& v) { c.model.max_len = parse_number<std::size_t>(k, v); }},
      {"cnn.filters", [](C& c, auto& k, auto& v) { c.model.cnn_filters = parse_number<int>(k, v); }},
      {"cnn.kernel", [](C& c, auto& k, auto& v) { c.model.cnn_kernel = parse_number<int>(k, v); }},
      {"cnn.pool", [](C& c, auto& k, auto& v) { c.model.cnn_pool = parse_number<int>(k, v); }},
      {"cnn.dense", [](C& c, auto& k, auto& v) { c.model.cnn_dense = parse_number<int>(k, v); }},
      {"cnn.dropout",
       [](C& c, auto& k, auto& v) { c.model.cnn_dropout = parse_number<float>(k, v); }},
      {"cnn.dropout_placement",
       [](C& c, auto& k, auto& v) {
         if (v == "after_first_pool") {
           c.model.cnn_dropout_placement = CnnDropoutPlacement::AfterFirstPool;
         } else if (v == "after_second_pool") {
           c.model.cnn_dropout_placement = CnnDropoutPlacement::AfterSecondPool;
         } else {
           throw Error(ErrorKind::Config,
                       k + ": expected after_first_pool or after_second_pool, got '" + v + "'");
         }
       }},
      {"lstm.units", [](C& c, auto& k, auto& v) { c.model.lstm_units = parse_number<int>(k, v); }},
      {"lstm.dense", [](C& c, auto& k, auto& v) { c.model.lstm_dense = parse_number<int>(k, v); }},
      {"lstm.dropout",
       [](C& c, auto& k, auto& v) { c.model.lstm_dropout = parse_number<float>(k, v); }},
      {"bilstm.units",
       [](C& c, auto& k, auto& v) { c.model.bilstm_units = parse_number<int>(k, v); }},
      {"bilstm.dense",
       [](C& c, auto& k, auto& v) { c.model.bilstm_dense = parse_number<int>(k, v); }},
      {"bilstm.dropout",
       [](C& c, auto& k, auto& v) { c.model.bilstm_dropout = parse_number<float>(k, v); }},
      {"transformer.head_dropout",
       [](C& c, auto& k, auto& v) {
         c.model.transformer_head_dropout = parse_number<float>(k, v);
       }},
      {"learning_rate",
       [](C& c, auto& k, auto& v) {
         if (v.empty() || v == "default") {
           c.learning_rate.reset();
         } else {
           c.learning_rate = parse_number<double>(k, v);
         }
       }},
      {"epochs",
       [](C& c, auto& k, auto& v) {
         if (v.empty() || v == "default") {
           c.max_epochs.reset();
         } else {
           c.max_epochs = parse_number<int>(k, v);
         }
       }},
      {"batch_size", [](C& c, auto& k, auto& v) { c.batch_size = parse_number<int>(k, v); }},
      {"oversample", [](C& c, auto& k, auto& v) { c.oversample_minority = parse_bool(k, v); }},
      {"out", [](C& c, auto&, auto& v) { c.out_dir = v; }},
      {"seed", [](C& c, auto& k, auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
      {"image", [](C& c, auto&, auto& v) { c.image_format = v; }},
  };
  return table;
}

}  // namespace

ConfigValues parse_config_text(std::string_view text, std::string_view source) {
  ConfigValues out;
  std::vector<std::string> problems;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      problems.push_back(std::string(source) + ":" + std::to_string(n) +
                         ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) {
      problems.push_back(std::string(source) + ":" + std::to_string(n) + ": empty key");
      continue;
    }
    out[key] = unquote(trim(body.substr(eq + 1)));
  }
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorKind::Config, msg);
  }
  return out;
}

ConfigValues read_config_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot read config file '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config_text(s.str(), path.string());
}

std::vector<std::string> config_violations(const ExperimentConfig& c) {
  std::vector<std::string> v;
  if (c.train_path.empty()) {
    v.push_back("train: a training data path is required");
  } else if (!fs::is_regular_file(c.train_path)) {
    v.push_back("train: file '" + c.train_path.string() + "' does not exist");
  }
  if (c.test_path && !fs::is_regular_file(*c.test_path)) {
    v.push_back("test: file '" + c.test_path->string() + "' does not exist");
  }
  if (!(c.val_fraction > 0.0 && c.val_fraction < 1.0)) {
    v.push_back("val_fraction: must lie strictly between 0 and 1");
  }
  if (c.task != Task::Binary && c.columns.fine.empty()) {
    v.push_back("fine_column: fine-grained tasks need the fine-label column");
  }
  if (c.task == Task::Binary && c.columns.binary.empty()) {
    v.push_back("binary_column: the binary task needs a label column");
  }
  if (c.architecture == Architecture::Transformer) {
    if (c.checkpoint.empty()) v.push_back("checkpoint: required for the transformer architecture");
  } else {
    if (c.embedding_mode != EmbeddingMode::Random) {
      if (!c.vectors_path) {
        v.push_back("vectors: required for embedding mode " +
                    std::string(to_string(c.embedding_mode)));
      } else if (!fs::is_regular_file(*c.vectors_path)) {
        v.push_back("vectors: file '" + c.vectors_path->string() + "' does not exist");
      }
    }
    if (c.embedding_dim < 1) v.push_back("embedding_dim: must be >= 1");
    if (c.min_freq < 1) v.push_back("min_freq: must be >= 1");
  }
  if (c.model.max_len < 1) v.push_back("max_len: must be >= 1");
  if (c.architecture == Architecture::Cnn) {
    if (c.model.cnn_filters < 1 || c.model.cnn_kernel < 1 || c.model.cnn_pool < 1 ||
        c.model.cnn_dense < 1) {
      v.push_back("cnn.*: widths, kernel and pool must be >= 1");
    } else if (c.model.max_len < cnn_min_length(c.model)) {
      v.push_back("max_len: the CNN needs at least " + std::to_string(cnn_min_length(c.model)) +
                  " positions");
    }
  }
  if (c.model.lstm_units < 1 || c.model.lstm_dense < 1) v.push_back("lstm.*: widths must be >= 1");
  if (c.model.bilstm_units < 1 || c.model.bilstm_dense < 1) {
    v.push_back("bilstm.*: widths must be >= 1");
  }
  for (float r : {c.model.cnn_dropout, c.model.lstm_dropout, c.model.bilstm_dropout,
                  c.model.transformer_head_dropout}) {
    if (!(r >= 0.0f && r < 1.0f)) {
      v.push_back("dropout rates must lie in [0, 1)");
      break;
    }
  }
  if (c.learning_rate && !(*c.learning_rate > 0.0)) v.push_back("learning_rate: must be > 0");
  if (c.max_epochs && *c.max_epochs < 1) v.push_back("epochs: must be >= 1");
  if (c.batch_size < 1) v.push_back("batch_size: must be >= 1");
  if (c.out_dir.empty()) v.push_back("out: an output directory is required");
  if (c.image_format != "png" && c.image_format != "svg") v.push_back("image: must be png or svg");
  return v;
}

ExperimentConfig resolve_config(const ConfigValues& values) {
  ExperimentConfig cfg;
  std::vector<std::string> problems;
  const auto& table = setters();
  for (const auto& [key, value] : values) {
    const auto it = table.find(key);
    if (it == table.end()) {
      problems.push_back(key + ": unknown key");
      continue;
    }
    try {
      it->second(cfg, key, value);
    } catch (const Error& e) {
      const std::string msg = e.what();
      problems.push_back(msg.rfind(key + ":", 0) == 0 ? msg : key + ": " + msg);
    }
  }
  for (auto& v : config_violations(cfg)) problems.push_back(std::move(v));
  if (!problems.empty()) {
    std::string msg = "invalid config (" + std::to_string(problems.size()) + " problem" +
                      (problems.size() == 1 ? "" : "s") + "):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorKind::Config, msg);
  }
  return cfg;
}

std::string config_to_text(const ExperimentConfig& c) {
  const auto& m = c.model;
  std::ostringstream s;
  auto kv = [&s](std::string_view k, const std::string& v) { s << k << " = " << v << "\n"; };
  kv("task", std::string(to_string(c.task)));
  kv("train", c.train_path.string());
  kv("test", c.test_path ? c.test_path->string() : "");
  kv("id_column", c.columns.id);
  kv("text_column", c.columns.text);
  kv("binary_column", c.columns.binary);
  kv("fine_column", c.columns.fine);
  kv("val_fraction", fmt_real(c.val_fraction));
  kv("architecture", std::string(to_string(c.architecture)));
  kv("embedding", std::string(to_string(c.embedding_mode)));
  kv("vectors", c.vectors_path ? c.vectors_path->string() : "");
  kv("embedding_dim", std::to_string(c.embedding_dim));
  kv("min_freq", std::to_string(c.min_freq));
  kv("checkpoint", c.checkpoint);
  kv("max_len", std::to_string(m.max_len));
  kv("cnn.filters", std::to_string(m.cnn_filters));
  kv("cnn.kernel", std::to_string(m.cnn_kernel));
  kv("cnn.pool", std::to_string(m.cnn_pool));
  kv("cnn.dense", std::to_string(m.cnn_dense));
  kv("cnn.dropout", fmt_real(m.cnn_dropout));
  kv("cnn.dropout_placement", m.cnn_dropout_placement == CnnDropoutPlacement::AfterFirstPool
                                  ? "after_first_pool"
                                  : "after_second_pool");
  kv("lstm.units", std::to_string(m.lstm_units));
  kv("lstm.dense", std::to_string(m.lstm_dense));
  kv("lstm.dropout", fmt_real(m.lstm_dropout));
  kv("bilstm.units", std::to_string(m.bilstm_units));
  kv("bilstm.dense", std::to_string(m.bilstm_dense));
  kv("bilstm.dropout", fmt_real(m.bilstm_dropout));
  kv("transformer.head_dropout", fmt_real(m.transformer_head_dropout));
  const TrainConfig t = c.train_config();
  kv("learning_rate", fmt_real(t.learning_rate));
  kv("epochs", std::to_string(t.max_epochs));
  kv("batch_size", std::to_string(c.batch_size));
  kv("oversample", c.oversample_minority ? "true" : "false");
  kv("out", c.out_dir.string());
  kv("seed", std::to_string(c.seed));
  kv("image", c.image_format);
  return s.str();
}

}  // namespace hateclf
