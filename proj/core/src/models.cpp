#include "hateclf/models.hpp"

#include <fstream>
#include <sstream>

#include "hateclf/error.hpp"
#include "hateclf/nn/lstm.hpp"
#include "hateclf/nn/param_io.hpp"
#include "hateclf/transformer.hpp"
#include "model_io.hpp"

namespace hateclf {

using nlohmann::json;

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::Cnn: return "cnn";
    case Architecture::Lstm: return "lstm";
    case Architecture::BiLstm: return "bilstm";
    case Architecture::Transformer: return "transformer";
  }
  return "?";
}

Architecture architecture_from_string(std::string_view name) {
  const std::string n = normalize_label(name);
  if (n == "CNN") return Architecture::Cnn;
  if (n == "LSTM") return Architecture::Lstm;
  if (n == "BILSTM" || n == "BI-LSTM" || n == "BI_LSTM") return Architecture::BiLstm;
  if (n == "TRANSFORMER" || n == "BERT") return Architecture::Transformer;
  throw Error(ErrorKind::Config, "unknown architecture '" + std::string(name) + "'");
}

// ---- ClassifierModel --------------------------------------------------------

nn::Matrix ClassifierModel::forward(const nn::IndexBatch& batch) const {
  validate_batch(batch);
  return nn::softmax_rows(inference_logits(batch));
}

nn::Matrix ClassifierModel::forward_texts(std::span<const std::string> texts) const {
  return forward(encode_texts(texts));
}

const nn::Param* ClassifierModel::find_parameter(std::string_view name) const {
  for (const nn::Param* p : const_cast<ClassifierModel*>(this)->parameters()) {
    if (p->name == name) return p;
  }
  return nullptr;
}

std::vector<std::size_t> argmax_rows(const nn::Matrix& probs) {
  std::vector<std::size_t> out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < probs.cols(); ++j) {
      if (probs(i, j) > probs(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return out;
}

// ---- SequenceClassifier -----------------------------------------------------

namespace {

struct SequenceState final : ForwardState {
  nn::IndexBatch batch;
  nn::Sequential::Tape tape;
};

}  // namespace

SequenceClassifier::SequenceClassifier(ModelSpec spec, Vocabulary vocab, nn::Param embedding,
                                       nn::Sequential body)
    : spec_(std::move(spec)),
      vocab_(std::move(vocab)),
      embedding_(std::move(embedding)),
      body_(std::move(body)) {}

nn::IndexBatch SequenceClassifier::encode_texts(std::span<const std::string> texts) const {
  const std::size_t max_len = spec_.options.max_len;
  nn::IndexBatch batch;
  batch.batch = static_cast<int>(texts.size());
  batch.steps = static_cast<int>(max_len);
  batch.ids.reserve(texts.size() * max_len);
  for (const auto& t : texts) {
    const EncodedExample e = encode(tokenize(t), vocab_, max_len);
    batch.ids.insert(batch.ids.end(), e.indices.begin(), e.indices.end());
  }
  return batch;
}

void SequenceClassifier::validate_batch(const nn::IndexBatch& batch) const {
  if (batch.batch <= 0) throw Error(ErrorKind::Input, "empty batch");
  if (batch.steps != static_cast<int>(spec_.options.max_len)) {
    throw Error(ErrorKind::Input, "batch has " + std::to_string(batch.steps) +
                                      " steps, model expects " +
                                      std::to_string(spec_.options.max_len));
  }
  if (batch.ids.size() != static_cast<std::size_t>(batch.batch) * batch.steps) {
    throw Error(ErrorKind::Input, "batch id buffer does not match batch x steps");
  }
  const auto v = static_cast<std::int32_t>(embedding_.value.rows());
  for (auto id : batch.ids) {
    if (id < 0 || id >= v) {
      throw Error(ErrorKind::Input, "token index " + std::to_string(id) +
                                        " outside vocabulary of " + std::to_string(v));
    }
  }
}

nn::Tensor SequenceClassifier::lookup(const nn::IndexBatch& batch) const {
  nn::Matrix x(static_cast<Eigen::Index>(batch.batch) * batch.steps, embedding_.value.cols());
  for (std::size_t r = 0; r < batch.ids.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = embedding_.value.row(batch.ids[r]);
  }
  return {batch.batch, batch.steps, std::move(x)};
}

nn::Matrix SequenceClassifier::inference_logits(const nn::IndexBatch& batch) const {
  nn::ForwardContext ctx;
  return body_.forward(lookup(batch), ctx, nullptr).data;
}

nn::Matrix SequenceClassifier::train_logits(const nn::IndexBatch& batch, Rng& dropout_rng,
                                            std::unique_ptr<ForwardState>& state) const {
  validate_batch(batch);
  auto s = std::make_unique<SequenceState>();
  s->batch = batch;
  nn::ForwardContext ctx{nn::Phase::Training, &dropout_rng};
  nn::Matrix logits = body_.forward(lookup(batch), ctx, &s->tape).data;
  state = std::move(s);
  return logits;
}

void SequenceClassifier::backward(const nn::Matrix& grad_logits, const ForwardState& state) {
  const auto& s = static_cast<const SequenceState&>(state);
  nn::Tensor g{s.batch.batch, 1, grad_logits};
  nn::Tensor dx = body_.backward(g, s.tape);
  if (!embedding_.trainable) return;
  for (std::size_t r = 0; r < s.batch.ids.size(); ++r) {
    const auto id = s.batch.ids[r];
    if (id == Vocabulary::kPad) continue;
    embedding_.grad.row(id) += dx.data.row(static_cast<Eigen::Index>(r));
  }
}

std::vector<nn::Param*> SequenceClassifier::parameters() {
  std::vector<nn::Param*> out{&embedding_};
  body_.collect_params(out);
  return out;
}

std::unique_ptr<ClassifierModel> SequenceClassifier::clone() const {
  return std::make_unique<SequenceClassifier>(*this);
}

std::string SequenceClassifier::summary() const {
  std::ostringstream s;
  s << to_string(spec_.architecture) << ": embedding(" << embedding_.value.rows() << "x"
    << embedding_.value.cols() << ", " << to_string(spec_.embedding_mode) << ") -> "
    << body_.describe() << " -> softmax(" << spec_.num_classes() << ")";
  return s.str();
}

void SequenceClassifier::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  json j = detail::spec_to_json(spec_);
  j["vocab_size"] = vocab_.size();
  j["embedding_dim"] = embedding_.value.cols();
  j["summary"] = summary();
  detail::write_json(dir / detail::kDescriptorFile, j);
  vocab_.save(dir / detail::kVocabFile);
  nn::save_params(dir / detail::kParamsFile,
                  const_cast<SequenceClassifier*>(this)->parameters());
}

// ---- builders ---------------------------------------------------------------

namespace {

nn::Param make_embedding_param(const EmbeddingMatrix& e) {
  nn::Param p("embedding", {static_cast<int>(e.values.rows()), static_cast<int>(e.values.cols())},
              static_cast<int>(e.values.rows()), static_cast<int>(e.values.cols()));
  p.value = e.values;
  p.trainable = e.trainable();
  return p;
}

ModelSpec base_spec(Architecture a, const EmbeddingMatrix& e, const LabelScheme& scheme,
                    const ModelOptions& options) {
  if (e.values.rows() != static_cast<Eigen::Index>(e.vocab.size()) || e.values.rows() < 2 ||
      e.values.cols() < 1) {
    throw Error(ErrorKind::Config, "embedding matrix does not match its vocabulary");
  }
  if (options.max_len < 1) throw Error(ErrorKind::Config, "max_len must be >= 1");
  ModelSpec spec;
  spec.architecture = a;
  spec.scheme = scheme;
  spec.options = options;
  spec.embedding_mode = e.mode;
  return spec;
}

}  // namespace

std::size_t cnn_min_length(const ModelOptions& o) {
  for (std::size_t len = 1;; ++len) {
    int steps = static_cast<int>(len);
    steps = nn::Conv1D::output_steps(steps, o.cnn_kernel);
    if (steps < 1) continue;
    steps = nn::MaxPool1D::output_steps(steps, o.cnn_pool);
    if (steps < 1) continue;
    steps = nn::Conv1D::output_steps(steps, o.cnn_kernel);
    if (steps < 1) continue;
    steps = nn::MaxPool1D::output_steps(steps, o.cnn_pool);
    if (steps >= 1) return len;
  }
}

std::unique_ptr<ClassifierModel> build_cnn(const EmbeddingMatrix& embedding,
                                           const LabelScheme& scheme,
                                           const ModelOptions& options) {
  ModelSpec spec = base_spec(Architecture::Cnn, embedding, scheme, options);
  const std::size_t min_len = cnn_min_length(options);
  if (options.max_len < min_len) {
    throw Error(ErrorKind::Config, "CNN needs max_len >= " + std::to_string(min_len) +
                                       " for two conv/pool stages, got " +
                                       std::to_string(options.max_len));
  }
  Rng rng(options.init_seed);
  const int d = static_cast<int>(embedding.dim());
  const bool early = options.cnn_dropout_placement == CnnDropoutPlacement::AfterFirstPool;
  nn::Sequential body;
  body.add(std::make_unique<nn::Conv1D>("conv1", d, options.cnn_filters, options.cnn_kernel, rng));
  body.add(std::make_unique<nn::Relu>());
  body.add(std::make_unique<nn::MaxPool1D>(options.cnn_pool));
  if (early) body.add(std::make_unique<nn::Dropout>(options.cnn_dropout));
  body.add(std::make_unique<nn::Conv1D>("conv2", options.cnn_filters, options.cnn_filters,
                                        options.cnn_kernel, rng));
  body.add(std::make_unique<nn::Relu>());
  body.add(std::make_unique<nn::MaxPool1D>(options.cnn_pool));
  if (!early) body.add(std::make_unique<nn::Dropout>(options.cnn_dropout));
  body.add(std::make_unique<nn::GlobalMaxPool1D>());
  body.add(std::make_unique<nn::Dense>("dense1", options.cnn_filters, options.cnn_dense, rng));
  body.add(std::make_unique<nn::Relu>());
  body.add(std::make_unique<nn::Dense>("output", options.cnn_dense,
                                       static_cast<int>(scheme.size()), rng));
  return std::make_unique<SequenceClassifier>(std::move(spec), embedding.vocab,
                                              make_embedding_param(embedding), std::move(body));
}

std::unique_ptr<ClassifierModel> build_lstm(const EmbeddingMatrix& embedding,
                                            const LabelScheme& scheme,
                                            const ModelOptions& options) {
  ModelSpec spec = base_spec(Architecture::Lstm, embedding, scheme, options);
  Rng rng(options.init_seed);
  const int d = static_cast<int>(embedding.dim());
  nn::Sequential body;
  body.add(std::make_unique<nn::Lstm>("lstm", d, options.lstm_units, false, rng));
  body.add(std::make_unique<nn::GlobalMaxPool1D>());
  body.add(std::make_unique<nn::Dense>("dense1", options.lstm_units, options.lstm_dense, rng));
  body.add(std::make_unique<nn::Relu>());
  body.add(std::make_unique<nn::Dropout>(options.lstm_dropout));
  body.add(std::make_unique<nn::Dense>("output", options.lstm_dense,
                                       static_cast<int>(scheme.size()), rng));
  return std::make_unique<SequenceClassifier>(std::move(spec), embedding.vocab,
                                              make_embedding_param(embedding), std::move(body));
}

std::unique_ptr<ClassifierModel> build_bilstm(const EmbeddingMatrix& embedding,
                                              const LabelScheme& scheme,
                                              const ModelOptions& options) {
  ModelSpec spec = base_spec(Architecture::BiLstm, embedding, scheme, options);
  Rng rng(options.init_seed);
  const int d = static_cast<int>(embedding.dim());
  const int pooled = 2 * options.bilstm_units;
  nn::Sequential body;
  body.add(std::make_unique<nn::Bidirectional>("bilstm", d, options.bilstm_units, rng));
  body.add(std::make_unique<nn::GlobalMaxPool1D>());
  body.add(std::make_unique<nn::Dense>("dense1", pooled, options.bilstm_dense, rng));
  body.add(std::make_unique<nn::Relu>());
  body.add(std::make_unique<nn::Dropout>(options.bilstm_dropout));
  body.add(std::make_unique<nn::Dense>("output", options.bilstm_dense,
                                       static_cast<int>(scheme.size()), rng));
  return std::make_unique<SequenceClassifier>(std::move(spec), embedding.vocab,
                                              make_embedding_param(embedding), std::move(body));
}

std::unique_ptr<ClassifierModel> build_basic_model(Architecture architecture,
                                                   const EmbeddingMatrix& embedding,
                                                   const LabelScheme& scheme,
                                                   const ModelOptions& options) {
  switch (architecture) {
    case Architecture::Cnn: return build_cnn(embedding, scheme, options);
    case Architecture::Lstm: return build_lstm(embedding, scheme, options);
    case Architecture::BiLstm: return build_bilstm(embedding, scheme, options);
    case Architecture::Transformer: break;
  }
  throw Error(ErrorKind::Config, "transformer models are built from a checkpoint, not an embedding");
}

// ---- persistence ------------------------------------------------------------

namespace detail {

json spec_to_json(const ModelSpec& spec) {
  const auto& o = spec.options;
  return json{
      {"format", "hateclf-model/1"},
      {"architecture", to_string(spec.architecture)},
      {"scheme", to_string(spec.scheme.kind())},
      {"labels", spec.scheme.labels()},
      {"embedding_mode", to_string(spec.embedding_mode)},
      {"checkpoint", spec.checkpoint},
      {"options",
       {{"max_len", o.max_len},
        {"init_seed", o.init_seed},
        {"cnn_filters", o.cnn_filters},
        {"cnn_kernel", o.cnn_kernel},
        {"cnn_pool", o.cnn_pool},
        {"cnn_dense", o.cnn_dense},
        {"cnn_dropout", o.cnn_dropout},
        {"cnn_dropout_placement", o.cnn_dropout_placement == CnnDropoutPlacement::AfterFirstPool
                                      ? "after_first_pool"
                                      : "after_second_pool"},
        {"lstm_units", o.lstm_units},
        {"lstm_dense", o.lstm_dense},
        {"lstm_dropout", o.lstm_dropout},
        {"bilstm_units", o.bilstm_units},
        {"bilstm_dense", o.bilstm_dense},
        {"bilstm_dropout", o.bilstm_dropout},
        {"transformer_head_dropout", o.transformer_head_dropout}}}};
}

ModelSpec spec_from_json(const json& j) {
  try {
    ModelSpec spec;
    spec.architecture = architecture_from_string(j.at("architecture").get<std::string>());
    spec.scheme = LabelScheme(scheme_kind_from_string(j.at("scheme").get<std::string>()),
                              j.at("labels").get<std::vector<std::string>>());
    spec.embedding_mode = embedding_mode_from_string(j.at("embedding_mode").get<std::string>());
    spec.checkpoint = j.value("checkpoint", "");
    const json& o = j.at("options");
    auto& opt = spec.options;
    opt.max_len = o.at("max_len").get<std::size_t>();
    opt.init_seed = o.at("init_seed").get<std::uint64_t>();
    opt.cnn_filters = o.at("cnn_filters").get<int>();
    opt.cnn_kernel = o.at("cnn_kernel").get<int>();
    opt.cnn_pool = o.at("cnn_pool").get<int>();
    opt.cnn_dense = o.at("cnn_dense").get<int>();
    opt.cnn_dropout = o.at("cnn_dropout").get<float>();
    opt.cnn_dropout_placement = o.at("cnn_dropout_placement").get<std::string>() == "after_first_pool"
                                    ? CnnDropoutPlacement::AfterFirstPool
                                    : CnnDropoutPlacement::AfterSecondPool;
    opt.lstm_units = o.at("lstm_units").get<int>();
    opt.lstm_dense = o.at("lstm_dense").get<int>();
    opt.lstm_dropout = o.at("lstm_dropout").get<float>();
    opt.bilstm_units = o.at("bilstm_units").get<int>();
    opt.bilstm_dense = o.at("bilstm_dense").get<int>();
    opt.bilstm_dropout = o.at("bilstm_dropout").get<float>();
    opt.transformer_head_dropout = o.at("transformer_head_dropout").get<float>();
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("bad model descriptor: ") + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

}  // namespace detail

std::unique_ptr<ClassifierModel> load_model(const std::filesystem::path& dir) {
  const json j = detail::read_json(dir / detail::kDescriptorFile);
  ModelSpec spec = detail::spec_from_json(j);
  if (spec.architecture == Architecture::Transformer) return load_transformer_classifier(dir);

  Vocabulary vocab = Vocabulary::load(dir / detail::kVocabFile);
  const auto dim = j.at("embedding_dim").get<std::size_t>();
  EmbeddingMatrix placeholder{vocab, nn::Matrix::Zero(static_cast<Eigen::Index>(vocab.size()),
                                                      static_cast<Eigen::Index>(dim)),
                              spec.embedding_mode, 0.0};
  auto model = build_basic_model(spec.architecture, placeholder, spec.scheme, spec.options);
  nn::load_params(dir / detail::kParamsFile, model->parameters());
  return model;
}

}  // namespace hateclf
