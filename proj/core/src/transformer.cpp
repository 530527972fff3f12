#include "hateclf/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hateclf/error.hpp"
#include "hateclf/nn/param_io.hpp"
#include "hateclf/safetensors.hpp"
#include "json.hpp"
#include "model_io.hpp"

namespace hateclf {

namespace fs = std::filesystem;
using nlohmann::json;
using nn::Matrix;
using nn::Tensor;

// ---- config / checkpoint resolution ---------------------------------------

BertConfig BertConfig::from_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Load, "checkpoint has no config.json at '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Load, "bad config.json: " + std::string(e.what()));
  }
  const std::string type = j.value("model_type", "bert");
  if (type != "bert") {
    throw Error(ErrorKind::Load, "unsupported encoder type '" + type + "' (only BERT encoders)");
  }
  BertConfig c;
  try {
    c.vocab_size = j.at("vocab_size").get<int>();
    c.hidden_size = j.value("hidden_size", c.hidden_size);
    c.num_hidden_layers = j.value("num_hidden_layers", c.num_hidden_layers);
    c.num_attention_heads = j.value("num_attention_heads", c.num_attention_heads);
    c.intermediate_size = j.value("intermediate_size", c.intermediate_size);
    c.max_position_embeddings = j.value("max_position_embeddings", c.max_position_embeddings);
    c.type_vocab_size = j.value("type_vocab_size", c.type_vocab_size);
    c.layer_norm_eps = j.value("layer_norm_eps", c.layer_norm_eps);
    c.hidden_dropout_prob = j.value("hidden_dropout_prob", c.hidden_dropout_prob);
    c.attention_probs_dropout_prob =
        j.value("attention_probs_dropout_prob", c.attention_probs_dropout_prob);
    c.initializer_range = j.value("initializer_range", c.initializer_range);
    c.hidden_act = j.value("hidden_act", c.hidden_act);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Load, "bad config.json: " + std::string(e.what()));
  }
  if (c.hidden_size % c.num_attention_heads != 0) {
    throw Error(ErrorKind::Load, "hidden_size is not a multiple of num_attention_heads");
  }
  if (c.hidden_act != "gelu" && c.hidden_act != "gelu_new" && c.hidden_act != "gelu_pytorch_tanh") {
    throw Error(ErrorKind::Load, "unsupported hidden_act '" + c.hidden_act + "'");
  }
  return c;
}

void BertConfig::save(const fs::path& path) const {
  const json j{{"model_type", "bert"},
               {"vocab_size", vocab_size},
               {"hidden_size", hidden_size},
               {"num_hidden_layers", num_hidden_layers},
               {"num_attention_heads", num_attention_heads},
               {"intermediate_size", intermediate_size},
               {"max_position_embeddings", max_position_embeddings},
               {"type_vocab_size", type_vocab_size},
               {"layer_norm_eps", layer_norm_eps},
               {"hidden_dropout_prob", hidden_dropout_prob},
               {"attention_probs_dropout_prob", attention_probs_dropout_prob},
               {"initializer_range", initializer_range},
               {"hidden_act", hidden_act}};
  detail::write_json(path, j);
}

fs::path resolve_checkpoint(const std::string& checkpoint_id) {
  if (checkpoint_id.empty()) throw Error(ErrorKind::Load, "empty checkpoint id");
  const fs::path direct(checkpoint_id);
  if (fs::is_directory(direct)) return direct;

  std::vector<fs::path> caches;
  if (const char* v = std::getenv("HF_HUB_CACHE")) caches.emplace_back(v);
  if (const char* v = std::getenv("HF_HOME")) caches.push_back(fs::path(v) / "hub");
  if (const char* v = std::getenv("HOME")) caches.push_back(fs::path(v) / ".cache/huggingface/hub");

  std::string folder = "models--";
  for (char c : checkpoint_id) {
    if (c == '/') {
      folder += "--";
    } else {
      folder += c;
    }
  }
  for (const auto& cache : caches) {
    const fs::path repo = cache / folder;
    if (!fs::is_directory(repo / "snapshots")) continue;
    std::ifstream ref(repo / "refs" / "main");
    std::string rev;
    if (ref && std::getline(ref, rev) && fs::is_directory(repo / "snapshots" / rev)) {
      return repo / "snapshots" / rev;
    }
    std::vector<fs::path> snaps;
    for (const auto& e : fs::directory_iterator(repo / "snapshots")) {
      if (e.is_directory()) snaps.push_back(e.path());
    }
    if (!snaps.empty()) {
      std::sort(snaps.begin(), snaps.end());
      return snaps.front();
    }
  }
  throw Error(ErrorKind::Load, "cannot resolve checkpoint '" + checkpoint_id +
                                   "': not a directory and not in the local hub cache");
}

// ---- model ------------------------------------------------------------------

namespace {

void normal_fill(Matrix& m, float stddev, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = static_cast<float>(rng.normal() * stddev);
  }
}

nn::Dense make_dense(const std::string& name, int in, int out, float stddev, Rng& rng) {
  nn::Dense d(name, in, out, rng);
  normal_fill(d.kernel().value, stddev, rng);
  return d;
}

nn::Dense placeholder_dense(const std::string& name, int in, int out) {
  Rng rng(0);
  return nn::Dense(name, in, out, rng);
}

nn::GeluForm gelu_form(const std::string& act) {
  return act == "gelu" ? nn::GeluForm::Erf : nn::GeluForm::Tanh;
}

}  // namespace

struct TransformerClassifier::State final : ForwardState {
  struct BlockState {
    std::unique_ptr<nn::LayerCache> q, k, v, attention_output, attention_dropout, attention_norm,
        intermediate, activation, output, output_dropout, output_norm;
    Tensor q_proj, k_proj, v_proj;
    std::vector<Matrix> probs;       // per (b, head), T x T
    std::vector<Matrix> prob_masks;  // scaled dropout masks, empty at inference
  };
  nn::IndexBatch batch;
  std::unique_ptr<nn::LayerCache> embedding_norm, embedding_dropout;
  std::vector<BlockState> blocks;
  std::unique_ptr<nn::LayerCache> pooler, pooler_tanh, head_dropout, classifier;
};

TransformerClassifier::TransformerClassifier(ModelSpec spec, BertConfig config,
                                             WordPieceTokenizer tokenizer)
    : spec_(std::move(spec)),
      config_(std::move(config)),
      tokenizer_(std::move(tokenizer)),
      word_("embeddings.word", {config_.vocab_size, config_.hidden_size}, config_.vocab_size,
            config_.hidden_size),
      position_("embeddings.position", {config_.max_position_embeddings, config_.hidden_size},
                config_.max_position_embeddings, config_.hidden_size),
      token_type_("embeddings.token_type", {config_.type_vocab_size, config_.hidden_size},
                  config_.type_vocab_size, config_.hidden_size),
      embedding_norm_("embeddings.norm", config_.hidden_size, config_.layer_norm_eps),
      pooler_(placeholder_dense("pooler", config_.hidden_size, config_.hidden_size)),
      classifier_(placeholder_dense("classifier", config_.hidden_size, 1)) {
  if (static_cast<int>(tokenizer_.vocab_size()) > config_.vocab_size) {
    throw Error(ErrorKind::Load, "tokenizer vocabulary (" +
                                     std::to_string(tokenizer_.vocab_size()) +
                                     ") exceeds encoder vocab_size (" +
                                     std::to_string(config_.vocab_size) + ")");
  }
  if (spec_.options.max_len < 2 ||
      spec_.options.max_len > static_cast<std::size_t>(config_.max_position_embeddings)) {
    throw Error(ErrorKind::Config, "transformer max_len must lie in [2, " +
                                       std::to_string(config_.max_position_embeddings) + "]");
  }
  Rng rng(spec_.options.init_seed);
  const float sd = config_.initializer_range;
  const int h = config_.hidden_size;
  normal_fill(word_.value, sd, rng);
  normal_fill(position_.value, sd, rng);
  normal_fill(token_type_.value, sd, rng);
  word_.value.row(tokenizer_.pad_id()).setZero();
  const nn::GeluForm form = gelu_form(config_.hidden_act);
  blocks_.reserve(static_cast<std::size_t>(config_.num_hidden_layers));
  for (int l = 0; l < config_.num_hidden_layers; ++l) {
    const std::string p = "encoder.layer" + std::to_string(l) + ".";
    blocks_.push_back(Block{make_dense(p + "query", h, h, sd, rng),
                            make_dense(p + "key", h, h, sd, rng),
                            make_dense(p + "value", h, h, sd, rng),
                            make_dense(p + "attention_output", h, h, sd, rng),
                            nn::LayerNorm(p + "attention_norm", h, config_.layer_norm_eps),
                            make_dense(p + "intermediate", h, config_.intermediate_size, sd, rng),
                            nn::Gelu(form),
                            make_dense(p + "output", config_.intermediate_size, h, sd, rng),
                            nn::LayerNorm(p + "output_norm", h, config_.layer_norm_eps)});
  }
  pooler_ = make_dense("pooler", h, h, sd, rng);
  // The head has its own stream so that it does not depend on encoder size.
  Rng head_rng(derive_seed(spec_.options.init_seed, "classifier"));
  classifier_ = make_dense("classifier", h, static_cast<int>(spec_.num_classes()), sd, head_rng);
}

nn::IndexBatch TransformerClassifier::encode_texts(std::span<const std::string> texts) const {
  const std::size_t max_len = spec_.options.max_len;
  nn::IndexBatch batch;
  batch.batch = static_cast<int>(texts.size());
  batch.steps = static_cast<int>(max_len);
  batch.ids.reserve(texts.size() * max_len);
  for (const auto& t : texts) {
    auto ids = tokenizer_.encode_for_classification(t, max_len);
    batch.ids.insert(batch.ids.end(), ids.begin(), ids.end());
  }
  return batch;
}

void TransformerClassifier::validate_batch(const nn::IndexBatch& batch) const {
  if (batch.batch <= 0) throw Error(ErrorKind::Input, "empty batch");
  if (batch.steps < 1 || batch.steps > config_.max_position_embeddings) {
    throw Error(ErrorKind::Input, "sequence length " + std::to_string(batch.steps) +
                                      " outside [1, max_position_embeddings]");
  }
  if (batch.ids.size() != static_cast<std::size_t>(batch.batch) * batch.steps) {
    throw Error(ErrorKind::Input, "batch id buffer does not match batch x steps");
  }
  for (auto id : batch.ids) {
    if (id < 0 || id >= config_.vocab_size) {
      throw Error(ErrorKind::Input, "token id " + std::to_string(id) + " outside encoder vocabulary");
    }
  }
}

Matrix TransformerClassifier::run(const nn::IndexBatch& batch, const nn::ForwardContext& ctx,
                                  State* st, bool stop_at_sequence, bool stop_at_pool) const {
  const int B = batch.batch;
  const int T = batch.steps;
  const int H = config_.hidden_size;
  const int heads = config_.num_attention_heads;
  const int dh = H / heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
  const bool training = ctx.training();
  const nn::Dropout hidden_drop(config_.hidden_dropout_prob);
  const float attn_rate = config_.attention_probs_dropout_prob;

  Matrix emb(static_cast<Eigen::Index>(B) * T, H);
  for (int b = 0; b < B; ++b) {
    for (int t = 0; t < T; ++t) {
      const Eigen::Index r = static_cast<Eigen::Index>(b) * T + t;
      emb.row(r) = word_.value.row(batch.at(b, t)) + position_.value.row(t) +
                   token_type_.value.row(0);
    }
  }
  Tensor x{B, T, std::move(emb)};
  x = embedding_norm_.forward(x, ctx, st ? &st->embedding_norm : nullptr);
  x = hidden_drop.forward(x, ctx, st ? &st->embedding_dropout : nullptr);

  if (st) st->blocks.resize(blocks_.size());
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const Block& blk = blocks_[l];
    State::BlockState* bs = st ? &st->blocks[l] : nullptr;
    Tensor q = blk.query.forward(x, ctx, bs ? &bs->q : nullptr);
    Tensor k = blk.key.forward(x, ctx, bs ? &bs->k : nullptr);
    Tensor v = blk.value.forward(x, ctx, bs ? &bs->v : nullptr);

    Matrix context(static_cast<Eigen::Index>(B) * T, H);
    if (bs) {
      bs->probs.resize(static_cast<std::size_t>(B) * heads);
      bs->prob_masks.assign(training && attn_rate > 0 ? static_cast<std::size_t>(B) * heads : 0,
                            Matrix());
    }
    for (int b = 0; b < B; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b) * T;
      for (int hd = 0; hd < heads; ++hd) {
        const auto qh = q.data.block(r0, hd * dh, T, dh);
        const auto kh = k.data.block(r0, hd * dh, T, dh);
        const auto vh = v.data.block(r0, hd * dh, T, dh);
        Matrix scores = (qh * kh.transpose()) * scale;
        for (int j = 0; j < T; ++j) {
          if (batch.at(b, j) == tokenizer_.pad_id()) scores.col(j).array() = -1e9f;
        }
        Matrix probs = nn::softmax_rows(scores);
        Matrix used = probs;
        if (training && attn_rate > 0) {
          Matrix mask(T, T);
          const float keep_scale = 1.0f / (1.0f - attn_rate);
          for (Eigen::Index i = 0; i < mask.size(); ++i) {
            mask.data()[i] = ctx.rng->bernoulli(attn_rate) ? 0.0f : keep_scale;
          }
          used = used.cwiseProduct(mask);
          if (bs) bs->prob_masks[static_cast<std::size_t>(b) * heads + hd] = std::move(mask);
        }
        context.block(r0, hd * dh, T, dh).noalias() = used * vh;
        if (bs) bs->probs[static_cast<std::size_t>(b) * heads + hd] = std::move(probs);
      }
    }
    if (bs) {
      bs->q_proj = std::move(q);
      bs->k_proj = std::move(k);
      bs->v_proj = std::move(v);
    }

    Tensor a = blk.attention_output.forward(Tensor{B, T, std::move(context)}, ctx,
                                            bs ? &bs->attention_output : nullptr);
    a = hidden_drop.forward(a, ctx, bs ? &bs->attention_dropout : nullptr);
    a.data += x.data;
    a = blk.attention_norm.forward(a, ctx, bs ? &bs->attention_norm : nullptr);

    Tensor f = blk.intermediate.forward(a, ctx, bs ? &bs->intermediate : nullptr);
    f = blk.activation.forward(f, ctx, bs ? &bs->activation : nullptr);
    f = blk.output.forward(f, ctx, bs ? &bs->output : nullptr);
    f = hidden_drop.forward(f, ctx, bs ? &bs->output_dropout : nullptr);
    f.data += a.data;
    x = blk.output_norm.forward(f, ctx, bs ? &bs->output_norm : nullptr);
  }
  if (stop_at_sequence) return std::move(x.data);

  Matrix cls(B, H);
  for (int b = 0; b < B; ++b) cls.row(b) = x.data.row(static_cast<Eigen::Index>(b) * T);
  Tensor pooled = pooler_.forward(Tensor{B, 1, std::move(cls)}, ctx, st ? &st->pooler : nullptr);
  pooled = nn::Tanh().forward(pooled, ctx, st ? &st->pooler_tanh : nullptr);
  if (stop_at_pool) return std::move(pooled.data);

  const nn::Dropout head_drop(spec_.options.transformer_head_dropout);
  pooled = head_drop.forward(pooled, ctx, st ? &st->head_dropout : nullptr);
  return classifier_.forward(pooled, ctx, st ? &st->classifier : nullptr).data;
}

Matrix TransformerClassifier::inference_logits(const nn::IndexBatch& batch) const {
  return run(batch, nn::ForwardContext{}, nullptr, false, false);
}

Matrix TransformerClassifier::sequence_output(const nn::IndexBatch& batch) const {
  validate_batch(batch);
  return run(batch, nn::ForwardContext{}, nullptr, true, false);
}

Matrix TransformerClassifier::pooled_output(const nn::IndexBatch& batch) const {
  validate_batch(batch);
  return run(batch, nn::ForwardContext{}, nullptr, false, true);
}

Matrix TransformerClassifier::train_logits(const nn::IndexBatch& batch, Rng& dropout_rng,
                                           std::unique_ptr<ForwardState>& state) const {
  validate_batch(batch);
  auto st = std::make_unique<State>();
  st->batch = batch;
  Matrix logits = run(batch, nn::ForwardContext{nn::Phase::Training, &dropout_rng}, st.get(),
                      false, false);
  state = std::move(st);
  return logits;
}

void TransformerClassifier::backward(const Matrix& grad_logits, const ForwardState& state) {
  const auto& st = static_cast<const State&>(state);
  const nn::IndexBatch& batch = st.batch;
  const int B = batch.batch;
  const int T = batch.steps;
  const int H = config_.hidden_size;
  const int heads = config_.num_attention_heads;
  const int dh = H / heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
  nn::Dropout hidden_drop(config_.hidden_dropout_prob);
  nn::Dropout head_drop(spec_.options.transformer_head_dropout);
  nn::Tanh tanh;

  Tensor g = classifier_.backward(Tensor{B, 1, grad_logits}, *st.classifier);
  g = head_drop.backward(g, *st.head_dropout);
  g = tanh.backward(g, *st.pooler_tanh);
  g = pooler_.backward(g, *st.pooler);

  Tensor dx{B, T, Matrix::Zero(static_cast<Eigen::Index>(B) * T, H)};
  for (int b = 0; b < B; ++b) dx.data.row(static_cast<Eigen::Index>(b) * T) = g.data.row(b);

  for (std::size_t l = blocks_.size(); l-- > 0;) {
    Block& blk = blocks_[l];
    const State::BlockState& bs = st.blocks[l];

    Tensor d = blk.output_norm.backward(dx, *bs.output_norm);
    Tensor da = d;  // residual into the attention sub-block output
    d = hidden_drop.backward(d, *bs.output_dropout);
    d = blk.output.backward(d, *bs.output);
    d = blk.activation.backward(d, *bs.activation);
    d = blk.intermediate.backward(d, *bs.intermediate);
    da.data += d.data;

    Tensor dn = blk.attention_norm.backward(da, *bs.attention_norm);
    Tensor dx_in = dn;  // residual into the block input
    dn = hidden_drop.backward(dn, *bs.attention_dropout);
    Tensor dctx = blk.attention_output.backward(dn, *bs.attention_output);

    Matrix dq = Matrix::Zero(static_cast<Eigen::Index>(B) * T, H);
    Matrix dk = Matrix::Zero(static_cast<Eigen::Index>(B) * T, H);
    Matrix dv = Matrix::Zero(static_cast<Eigen::Index>(B) * T, H);
    for (int b = 0; b < B; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b) * T;
      for (int hd = 0; hd < heads; ++hd) {
        const std::size_t idx = static_cast<std::size_t>(b) * heads + hd;
        const Matrix& probs = bs.probs[idx];
        const bool masked = !bs.prob_masks.empty();
        const Matrix used = masked ? Matrix(probs.cwiseProduct(bs.prob_masks[idx])) : probs;
        const auto qh = bs.q_proj.data.block(r0, hd * dh, T, dh);
        const auto kh = bs.k_proj.data.block(r0, hd * dh, T, dh);
        const auto vh = bs.v_proj.data.block(r0, hd * dh, T, dh);
        const auto dc = dctx.data.block(r0, hd * dh, T, dh);
        Matrix dused = dc * vh.transpose();
        dv.block(r0, hd * dh, T, dh).noalias() += used.transpose() * dc;
        Matrix dprobs = masked ? Matrix(dused.cwiseProduct(bs.prob_masks[idx])) : dused;
        Eigen::VectorXf row_dot = (dprobs.cwiseProduct(probs)).rowwise().sum();
        Matrix dscores = probs.cwiseProduct(dprobs - row_dot.replicate(1, T)) * scale;
        dq.block(r0, hd * dh, T, dh).noalias() += dscores * kh;
        dk.block(r0, hd * dh, T, dh).noalias() += dscores.transpose() * qh;
      }
    }
    dx_in.data += blk.query.backward(Tensor{B, T, std::move(dq)}, *bs.q).data;
    dx_in.data += blk.key.backward(Tensor{B, T, std::move(dk)}, *bs.k).data;
    dx_in.data += blk.value.backward(Tensor{B, T, std::move(dv)}, *bs.v).data;
    dx = std::move(dx_in);
  }

  dx = hidden_drop.backward(dx, *st.embedding_dropout);
  dx = embedding_norm_.backward(dx, *st.embedding_norm);
  for (int b = 0; b < B; ++b) {
    for (int t = 0; t < T; ++t) {
      const Eigen::Index r = static_cast<Eigen::Index>(b) * T + t;
      const auto id = batch.at(b, t);
      if (id != tokenizer_.pad_id()) word_.grad.row(id) += dx.data.row(r);
      position_.grad.row(t) += dx.data.row(r);
      token_type_.grad.row(0) += dx.data.row(r);
    }
  }
}

std::vector<nn::Param*> TransformerClassifier::encoder_parameters() {
  std::vector<nn::Param*> out{&word_, &position_, &token_type_};
  embedding_norm_.collect_params(out);
  for (auto& b : blocks_) {
    b.query.collect_params(out);
    b.key.collect_params(out);
    b.value.collect_params(out);
    b.attention_output.collect_params(out);
    b.attention_norm.collect_params(out);
    b.intermediate.collect_params(out);
    b.output.collect_params(out);
    b.output_norm.collect_params(out);
  }
  pooler_.collect_params(out);
  return out;
}

std::vector<nn::Param*> TransformerClassifier::parameters() {
  auto out = encoder_parameters();
  classifier_.collect_params(out);
  return out;
}

std::unique_ptr<ClassifierModel> TransformerClassifier::clone() const {
  return std::make_unique<TransformerClassifier>(*this);
}

std::string TransformerClassifier::summary() const {
  std::ostringstream s;
  s << "transformer(" << spec_.checkpoint << "): bert(layers=" << config_.num_hidden_layers
    << ", hidden=" << config_.hidden_size << ", heads=" << config_.num_attention_heads
    << ", vocab=" << config_.vocab_size << ") -> pooler(tanh) -> dropout("
    << spec_.options.transformer_head_dropout << ") -> softmax(" << spec_.num_classes() << ")";
  return s.str();
}

void TransformerClassifier::save(const fs::path& dir) const {
  fs::create_directories(dir);
  json j = detail::spec_to_json(spec_);
  j["summary"] = summary();
  detail::write_json(dir / detail::kDescriptorFile, j);
  config_.save(dir / "config.json");
  tokenizer_.save(dir);
  nn::save_params(dir / detail::kParamsFile,
                  const_cast<TransformerClassifier*>(this)->parameters());
}

void TransformerClassifier::load_pretrained(const fs::path& checkpoint_dir) {
  std::map<std::string, StoredTensor> tensors;
  const fs::path single = checkpoint_dir / "model.safetensors";
  const fs::path index = checkpoint_dir / "model.safetensors.index.json";
  if (fs::exists(single)) {
    tensors = read_safetensors(single);
  } else if (fs::exists(index)) {
    const json idx = detail::read_json(index);
    std::set<std::string> shards;
    for (const auto& [name, file] : idx.at("weight_map").items()) shards.insert(file.get<std::string>());
    for (const auto& shard : shards) tensors.merge(read_safetensors(checkpoint_dir / shard));
  } else {
    throw Error(ErrorKind::Load, "checkpoint '" + checkpoint_dir.string() +
                                     "' has no model.safetensors (convert .bin checkpoints first)");
  }

  std::string prefix;
  if (tensors.count("bert.embeddings.word_embeddings.weight")) {
    prefix = "bert.";
  } else if (!tensors.count("embeddings.word_embeddings.weight")) {
    throw Error(ErrorKind::Load, "checkpoint has no BERT embedding weights");
  }

  auto fetch = [&](const std::vector<std::string>& names) -> const StoredTensor* {
    for (const auto& n : names) {
      auto it = tensors.find(prefix + n);
      if (it != tensors.end()) return &it->second;
    }
    return nullptr;
  };
  auto assign = [&](nn::Param& p, const std::vector<std::string>& names, bool transpose) {
    const StoredTensor* t = fetch(names);
    if (!t) throw Error(ErrorKind::Load, "checkpoint lacks tensor '" + prefix + names.front() + "'");
    Eigen::Index rows = 1;
    Eigen::Index cols = 1;
    if (t->shape.size() == 2) {
      rows = t->shape[0];
      cols = t->shape[1];
    } else if (t->shape.size() == 1) {
      cols = t->shape[0];
    } else {
      throw Error(ErrorKind::Load, "tensor '" + names.front() + "' has unexpected rank");
    }
    Eigen::Map<const Matrix> src(t->values.data(), rows, cols);
    const Eigen::Index want_rows = transpose ? cols : rows;
    const Eigen::Index want_cols = transpose ? rows : cols;
    if (p.value.rows() != want_rows || p.value.cols() != want_cols) {
      throw Error(ErrorKind::Load, "tensor '" + names.front() + "' shape does not match config");
    }
    if (transpose) {
      p.value = src.transpose();
    } else {
      p.value = src;
    }
  };
  auto assign_dense = [&](nn::Dense& d, const std::string& base) {
    assign(d.kernel(), {base + ".weight"}, true);
    assign(d.bias(), {base + ".bias"}, false);
  };
  auto assign_norm = [&](nn::LayerNorm& n, const std::string& base) {
    assign(n.gamma(), {base + ".weight", base + ".gamma"}, false);
    assign(n.beta(), {base + ".bias", base + ".beta"}, false);
  };

  assign(word_, {"embeddings.word_embeddings.weight"}, false);
  assign(position_, {"embeddings.position_embeddings.weight"}, false);
  assign(token_type_, {"embeddings.token_type_embeddings.weight"}, false);
  assign_norm(embedding_norm_, "embeddings.LayerNorm");
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const std::string p = "encoder.layer." + std::to_string(l) + ".";
    Block& b = blocks_[l];
    assign_dense(b.query, p + "attention.self.query");
    assign_dense(b.key, p + "attention.self.key");
    assign_dense(b.value, p + "attention.self.value");
    assign_dense(b.attention_output, p + "attention.output.dense");
    assign_norm(b.attention_norm, p + "attention.output.LayerNorm");
    assign_dense(b.intermediate, p + "intermediate.dense");
    assign_dense(b.output, p + "output.dense");
    assign_norm(b.output_norm, p + "output.LayerNorm");
  }
  if (fetch({"pooler.dense.weight"})) assign_dense(pooler_, "pooler.dense");
  if (tensors.count(prefix + "encoder.layer." + std::to_string(blocks_.size()) +
                    ".attention.self.query.weight")) {
    throw Error(ErrorKind::Load, "checkpoint has more encoder layers than config.json declares");
  }
}

std::unique_ptr<ClassifierModel> build_transformer_classifier(const std::string& checkpoint_id,
                                                              const LabelScheme& scheme,
                                                              const ModelOptions& options) {
  const fs::path dir = resolve_checkpoint(checkpoint_id);
  BertConfig config = BertConfig::from_file(dir / "config.json");
  WordPieceTokenizer tokenizer = WordPieceTokenizer::from_directory(dir);
  ModelSpec spec;
  spec.architecture = Architecture::Transformer;
  spec.scheme = scheme;
  spec.options = options;
  spec.checkpoint = checkpoint_id;
  auto model = std::make_unique<TransformerClassifier>(std::move(spec), std::move(config),
                                                       std::move(tokenizer));
  model->load_pretrained(dir);
  return model;
}

std::unique_ptr<ClassifierModel> load_transformer_classifier(const fs::path& dir) {
  ModelSpec spec = detail::spec_from_json(detail::read_json(dir / detail::kDescriptorFile));
  BertConfig config = BertConfig::from_file(dir / "config.json");
  WordPieceTokenizer tokenizer = WordPieceTokenizer::from_directory(dir);
  auto model = std::make_unique<TransformerClassifier>(std::move(spec), std::move(config),
                                                       std::move(tokenizer));
  nn::load_params(dir / detail::kParamsFile, model->parameters());
  return model;
}

}  // namespace hateclf
