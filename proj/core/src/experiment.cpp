#include "hateclf/experiment.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <streambuf>

#include "hateclf/delimited.hpp"
#include "hateclf/error.hpp"
#include "hateclf/hashing.hpp"
#include "hateclf/pipeline.hpp"
#include "hateclf/text.hpp"
#include "hateclf/training.hpp"
#include "hateclf/transformer.hpp"
#include "json.hpp"

namespace hateclf {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

class TeeBuf final : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == traits_type::eof()) return traits_type::not_eof(c);
    const auto ch = traits_type::to_char_type(c);
    if (a_ && a_->sputc(ch) == traits_type::eof()) return traits_type::eof();
    if (b_ && b_->sputc(ch) == traits_type::eof()) return traits_type::eof();
    return c;
  }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    if (a_ && a_->sputn(s, n) != n) return 0;
    if (b_ && b_->sputn(s, n) != n) return 0;
    return n;
  }
  int sync() override {
    int r = 0;
    if (a_ && a_->pubsync() != 0) r = -1;
    if (b_ && b_->pubsync() != 0) r = -1;
    return r;
  }

 private:
  std::streambuf* a_;
  std::streambuf* b_;
};

template <typename F>
auto stage(std::string_view name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::Io, std::string(name) + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

bool header_has(const fs::path& path, const std::string& column) {
  const DelimitedTable t = read_delimited(path);
  return t.column(column).has_value();
}

// Labeled when the label column exists, otherwise loaded as unlabeled.
Dataset load_eval_set(const fs::path& path, const ExperimentConfig& cfg) {
  if (header_has(path, cfg.label_column())) {
    return load_dataset(path, cfg.scheme(), cfg.label_column(), cfg.columns);
  }
  return load_dataset(path, cfg.scheme(), std::nullopt, cfg.columns);
}

void write_vocab(const ClassifierModel& model, const fs::path& path) {
  if (const auto* seq = dynamic_cast<const SequenceClassifier*>(&model)) {
    seq->vocabulary().save(path);
    return;
  }
  if (const auto* tr = dynamic_cast<const TransformerClassifier*>(&model)) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    const auto& v = tr->tokenizer().vocab();
    for (std::size_t i = 0; i < v.size(); ++i) out << v[i] << '\t' << i << '\n';
  }
}

ojson input_entry(std::string_view role, const fs::path& p) {
  return ojson{{"role", role}, {"path", fs::absolute(p).lexically_normal().string()},
               {"sha256", sha256_file(p)}};
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream* log, RunMode mode) {
  stage("config", [&] {
    const auto problems = config_violations(cfg);
    if (problems.empty()) return;
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorKind::Config, msg);
  });

  RunOutcome outcome;
  outcome.dir = cfg.out_dir;
  const fs::path dir = cfg.out_dir;
  stage("output", [&] { fs::create_directories(dir); });

  std::ofstream log_file(dir / "training.log", std::ios::binary);
  if (!log_file) throw Error(ErrorKind::Io, "output: cannot write training.log");
  TeeBuf tee(log_file.rdbuf(), log ? log->rdbuf() : nullptr);
  std::ostream out(&tee);

  stage("output", [&] { write_file(dir / "config.txt", config_to_text(cfg)); });

  const Dataset full = stage("data", [&] {
    return load_dataset(cfg.train_path, cfg.scheme(), cfg.label_column(), cfg.columns);
  });
  auto [train_set, val_set] = stage("split", [&] {
    return stratified_split(full, cfg.val_fraction, derive_seed(cfg.seed, "split"));
  });
  out << "data train=" << train_set.size() << " val=" << val_set.size() << "\n";

  std::optional<Dataset> test_set;
  if (cfg.test_path) test_set = stage("data", [&] { return load_eval_set(*cfg.test_path, cfg); });

  std::optional<WordVectors> vectors;
  if (cfg.architecture != Architecture::Transformer &&
      cfg.embedding_mode != EmbeddingMode::Random) {
    vectors = stage("embeddings", [&] { return load_word_vectors(*cfg.vectors_path, cfg.embedding_dim); });
    out << "vectors=" << vectors->size() << " dim=" << vectors->dim << "\n";
  }

  ModelOptions options = cfg.model;
  options.init_seed = derive_seed(cfg.seed, "init");
  const ModelFactory factory = [&](const Dataset& data, const LabelScheme& scheme) {
    return stage("model", [&]() -> std::unique_ptr<ClassifierModel> {
      if (cfg.architecture == Architecture::Transformer) {
        return build_transformer_classifier(cfg.checkpoint, scheme, options);
      }
      const Vocabulary vocab = build_vocabulary(data, cfg.min_freq);
      const EmbeddingMatrix emb =
          build_embedding_matrix(vocab, vectors ? &*vectors : nullptr, cfg.embedding_mode,
                                 derive_seed(cfg.seed, "embedding"), cfg.embedding_dim);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", emb.coverage);
      out << "vocab=" << vocab.size() << " coverage=" << buf << "\n";
      return build_basic_model(cfg.architecture, emb, scheme, options);
    });
  };

  const TrainConfig tcfg = cfg.train_config();
  std::unique_ptr<ClassifierModel> single;
  std::optional<HierarchicalModel> hier;
  ojson history;
  stage("training", [&] {
    if (cfg.task == Task::FineHierarchical) {
      HierarchicalTraining ht = train_hierarchical(train_set, val_set, tcfg, tcfg, factory, &out);
      history["stage1"] = ojson::parse(ht.stage1.history_json());
      history["stage2"] = ojson::parse(ht.stage2.history_json());
      hier.emplace(std::move(ht.model));
    } else {
      auto model = factory(train_set, cfg.scheme());
      out << model->summary() << "\n";
      TrainResult r = train(*model, train_set, val_set, tcfg, TrainHooks{&out, {}});
      history = ojson::parse(r.history_json());
      single = std::move(r.best_model);
    }
  });

  stage("output", [&] {
    write_file(dir / "history.json", history.dump(2) + "\n");
    if (hier) {
      hier->save(dir / "model");
      write_vocab(hier->stage1(), dir / "vocab.tsv");
    } else {
      single->save(dir / "model");
      write_vocab(*single, dir / "vocab.tsv");
    }
  });

  std::vector<std::string> artifacts{"config.txt", "vocab.tsv", "training.log", "history.json",
                                     "model"};
  if (mode == RunMode::Full) {
    const Dataset& pred_set = test_set ? *test_set : val_set;
    const Dataset& eval_set = (test_set && test_set->labeled()) ? *test_set : val_set;
    outcome.evaluated_on = (test_set && test_set->labeled()) ? "test" : "validation";

    auto run_predict = [&](const Dataset& d) {
      if (hier) return hierarchical_predict(*hier, d);
      HierarchicalPrediction p;
      p.labels = cfg.task == Task::FineDirect ? direct_multiclass_predict(*single, d)
                                              : predict(*single, d);
      return p;
    };
    const HierarchicalPrediction preds = stage("prediction", [&] { return run_predict(pred_set); });
    stage("output", [&] {
      write_predictions(dir / "predictions.tsv", pred_set.ids(), preds.labels);
      if (hier) write_trace(dir / "trace.tsv", preds.trace);
    });
    artifacts.push_back("predictions.tsv");
    if (hier) artifacts.push_back("trace.tsv");

    const HierarchicalPrediction eval_preds =
        &eval_set == &pred_set ? preds : stage("prediction", [&] { return run_predict(eval_set); });
    const auto gold = eval_set.labels();
    MetricsReport report =
        stage("evaluation", [&] { return compute_metrics(gold, eval_preds.labels, cfg.scheme()); });
    report.metadata["task"] = std::string(to_string(cfg.task));
    report.metadata["architecture"] = std::string(to_string(cfg.architecture));
    if (cfg.architecture != Architecture::Transformer) {
      report.metadata["embedding"] = std::string(to_string(cfg.embedding_mode));
    }
    report.metadata["evaluated_on"] = outcome.evaluated_on;
    if (cfg.task == Task::FineHierarchical) {
      report.metadata["accuracy_scope"] = "merged 4-class output over all examples";
    }
    const ConfusionMatrix cm = confusion_matrix(gold, eval_preds.labels, cfg.scheme());
    const std::string image = "confusion." + cfg.image_format;
    stage("output", [&] {
      write_file(dir / "metrics.json", report_to_json(report));
      render_confusion_matrix(cm, dir / image);
    });
    artifacts.insert(artifacts.end(), {"metrics.json", image, "confusion.txt"});
    out << "evaluated_on=" << outcome.evaluated_on << "\n" << format_report(report);
    out << cm.to_text();
    outcome.report = std::move(report);
    outcome.confusion = cm;
  }

  stage("output", [&] {
    ojson manifest;
    manifest["tool"] = "hateclf";
    manifest["version"] = "0.1.0";
    manifest["seed"] = cfg.seed;
    manifest["sub_seeds"] = {{"split", derive_seed(cfg.seed, "split")},
                             {"init", derive_seed(cfg.seed, "init")},
                             {"embedding", derive_seed(cfg.seed, "embedding")},
                             {"train", tcfg.seed},
                             {"shuffle", derive_seed(tcfg.seed, "shuffle")},
                             {"dropout", derive_seed(tcfg.seed, "dropout")}};
    auto& inputs = manifest["inputs"] = ojson::array();
    inputs.push_back(input_entry("train", cfg.train_path));
    if (cfg.test_path) inputs.push_back(input_entry("test", *cfg.test_path));
    if (vectors) inputs.push_back(input_entry("vectors", *cfg.vectors_path));
    if (cfg.architecture == Architecture::Transformer) {
      const fs::path ck = resolve_checkpoint(cfg.checkpoint);
      for (const char* f : {"config.json", "vocab.txt", "model.safetensors"}) {
        if (fs::exists(ck / f)) inputs.push_back(input_entry(std::string("checkpoint/") + f, ck / f));
      }
    }
    manifest["split"] = {{"train", train_set.size()}, {"validation", val_set.size()},
                         {"test", test_set ? test_set->size() : 0}};
    manifest["artifacts"] = artifacts;
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  });
  out.flush();
  return outcome;
}

std::string IngestStats::to_text() const {
  std::ostringstream s;
  std::size_t w = 5;
  for (const auto& l : distribution.scheme.labels()) w = std::max(w, l.size());
  s << "label" << std::string(w - 5 + 2, ' ') << "count\n";
  for (std::size_t i = 0; i < distribution.counts.size(); ++i) {
    const auto& l = distribution.scheme.label(i);
    s << l << std::string(w - l.size() + 2, ' ') << distribution.counts[i] << "\n";
  }
  s << "total" << std::string(w - 5 + 2, ' ') << examples << "\n";
  char buf[96];
  std::snprintf(buf, sizeof buf, "avg_words=%.2f avg_tokens=%.2f\n", avg_words, avg_tokens);
  s << buf;
  return s.str();
}

IngestStats ingest_stats(const fs::path& path, SchemeKind scheme, const ColumnNames& columns) {
  const LabelScheme s = LabelScheme::of(scheme);
  const std::string& column = scheme == SchemeKind::Binary ? columns.binary : columns.fine;
  Dataset d = load_dataset(path, scheme == SchemeKind::Ternary ? LabelScheme::fine() : s, column,
                           columns);
  if (scheme == SchemeKind::Ternary) d = filter_non_none(d);
  IngestStats st;
  st.distribution = class_distribution(d);
  st.examples = d.size();
  std::size_t words = 0;
  std::size_t tokens = 0;
  for (const auto& ex : d.examples()) {
    words += count_words(ex.text);
    tokens += tokenize(ex.text).size();
  }
  if (!d.empty()) {
    st.avg_words = static_cast<double>(words) / static_cast<double>(d.size());
    st.avg_tokens = static_cast<double>(tokens) / static_cast<double>(d.size());
  }
  return st;
}

namespace {

struct KeyedLabels {
  std::vector<std::string> order;
  std::map<std::string, std::string> labels;
};

KeyedLabels read_keyed(const fs::path& path, const LabelScheme& scheme, const ColumnNames& columns,
                       std::string_view role) {
  std::ifstream probe(path);
  if (!probe) throw Error(ErrorKind::Io, std::string(role) + ": cannot read '" + path.string() + "'");
  probe.close();
  const DelimitedTable t = read_delimited(path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
  std::size_t id_col = 0;
  std::size_t label_col = 1;
  const auto label_name = scheme.kind() == SchemeKind::Binary ? columns.binary : columns.fine;
  if (t.column(columns.id) && t.column(label_name)) {
    id_col = *t.column(columns.id);
    label_col = *t.column(label_name);
  } else {
    if (t.header.size() != 2) {
      throw Error(ErrorKind::Schema, std::string(role) + ": '" + path.string() +
                                         "' is neither a two-column id/label file nor has columns " +
                                         columns.id + " and " + label_name);
    }
    // No recognisable header: the first line is data unless its label is not
    // a scheme label.
    if (scheme.contains(t.header[1])) {
      rows.push_back(t.header);
      lines.push_back(1);
    }
  }
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    rows.push_back(t.rows[i]);
    lines.push_back(t.line_numbers[i]);
  }
  KeyedLabels out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = path.string() + ":" + std::to_string(lines[i]);
    if (r.size() <= std::max(id_col, label_col)) {
      throw Error(ErrorKind::Format, std::string(role) + ": " + where + ": missing fields");
    }
    const auto canon = scheme.canonical(r[label_col]);
    if (!canon) {
      throw Error(ErrorKind::Validation, std::string(role) + ": " + where + ": label '" +
                                             r[label_col] + "' is not in scheme " +
                                             std::string(scheme.name()));
    }
    if (!out.labels.emplace(r[id_col], *canon).second) {
      throw Error(ErrorKind::Validation,
                  std::string(role) + ": " + where + ": duplicate id '" + r[id_col] + "'");
    }
    out.order.push_back(r[id_col]);
  }
  if (out.order.empty()) {
    throw Error(ErrorKind::EmptyData, std::string(role) + ": '" + path.string() + "' has no rows");
  }
  return out;
}

std::string first_missing(const KeyedLabels& from, const KeyedLabels& in) {
  std::string s;
  std::size_t n = 0;
  std::size_t total = 0;
  for (const auto& id : from.order) {
    if (in.labels.count(id)) continue;
    ++total;
    if (n < 5) {
      s += (n ? ", " : "") + id;
      ++n;
    }
  }
  if (total > n) s += ", ... (" + std::to_string(total) + " in total)";
  return s;
}

}  // namespace

Evaluation evaluate_files(const fs::path& gold, const fs::path& pred, const LabelScheme& scheme,
                          const ColumnNames& columns) {
  const KeyedLabels g = read_keyed(gold, scheme, columns, "gold");
  const KeyedLabels p = read_keyed(pred, scheme, columns, "predictions");
  const std::string missing_pred = first_missing(g, p);
  const std::string missing_gold = first_missing(p, g);
  if (!missing_pred.empty() || !missing_gold.empty()) {
    std::string msg = "id sets differ";
    if (!missing_pred.empty()) msg += "; missing from predictions: " + missing_pred;
    if (!missing_gold.empty()) msg += "; missing from gold: " + missing_gold;
    throw Error(ErrorKind::Validation, msg);
  }
  std::vector<std::string> y_true;
  std::vector<std::string> y_pred;
  for (const auto& id : g.order) {
    y_true.push_back(g.labels.at(id));
    y_pred.push_back(p.labels.at(id));
  }
  return Evaluation{compute_metrics(y_true, y_pred, scheme), confusion_matrix(y_true, y_pred, scheme)};
}

std::size_t predict_file(const fs::path& model_dir, const fs::path& input, const fs::path& out,
                         const ColumnNames& columns) {
  if (fs::is_directory(model_dir / "stage1")) {
    const HierarchicalModel h = HierarchicalModel::load(model_dir);
    const Dataset d = load_dataset(input, LabelScheme::fine(), std::nullopt, columns);
    const HierarchicalPrediction p = hierarchical_predict(h, d);
    write_predictions(out, d.ids(), p.labels);
    fs::path trace = out;
    trace.replace_extension(".trace.tsv");
    write_trace(trace, p.trace);
    return d.size();
  }
  const auto model = load_model(model_dir);
  const Dataset d = load_dataset(input, model->label_scheme(), std::nullopt, columns);
  write_predictions(out, d.ids(), predict(*model, d));
  return d.size();
}

}  // namespace hateclf
