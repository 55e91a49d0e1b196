#include "serkit/models.hpp"

#include <algorithm>
#include <cmath>

#include "serkit/augment.hpp"
#include "serkit/dsp.hpp"
#include "serkit/errors.hpp"
#include "serkit/util.hpp"

namespace serkit::models {

namespace {

const std::array<std::string, 4> kKindNames = {"svm", "lstm", "cnn_lite", "cnn34"};

constexpr size_t kStageChannels[4] = {64, 128, 256, 512};

std::vector<size_t> blocks_for(bool full) {
  return full ? std::vector<size_t>{3, 4, 6, 3} : std::vector<size_t>{1, 1, 1, 1};
}

}  // namespace

const std::string& kind_name(ModelKind kind) {
  return kKindNames[static_cast<size_t>(kind)];
}

ModelKind kind_from_name(const std::string& name) {
  for (size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<ModelKind>(i);
  throw IoError("unknown model kind '" + name + "'");
}

bool is_cnn(ModelKind kind) {
  return kind == ModelKind::cnn_lite || kind == ModelKind::cnn34;
}

// ---------------------------------------------------------------------------
// LstmClassifier

LstmClassifier::LstmClassifier()
    : lstm1_(kInputDim, kHidden, "lstm1"),
      lstm2_(2 * kHidden, kHidden, "lstm2"),
      dropout_(kDropout),
      fc_(2 * kHidden, kClasses, "fc") {}

void LstmClassifier::init(Rng& rng) {
  lstm1_.init(rng);
  lstm2_.init(rng);
  fc_.init(rng);
}

nn::Tensor<float> LstmClassifier::forward(const nn::Tensor<float>& x,
                                          const nn::Context& ctx) {
  if (x.ndim() != 3 || x.dim(2) != kInputDim)
    throw ShapeMismatch("LstmClassifier: expected batch x T x 128 input");
  const size_t n = x.dim(0), t = x.dim(1);
  last_t_ = t;

  nn::Tensor<float> y2 = lstm2_.forward(lstm1_.forward(x, ctx), ctx);
  // Final forward state and first-step backward state.
  nn::Tensor<float> pooled({n, 2 * kHidden});
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < kHidden; ++j) {
      pooled.at2(i, j) = y2.at3(i, t - 1, j);
      pooled.at2(i, kHidden + j) = y2.at3(i, 0, kHidden + j);
    }
  }
  return fc_.forward(dropout_.forward(pooled, ctx), ctx);
}

nn::Tensor<float> LstmClassifier::backward(const nn::Tensor<float>& dlogits) {
  nn::Tensor<float> dpooled = dropout_.backward(fc_.backward(dlogits));
  const size_t n = dpooled.dim(0), t = last_t_;
  nn::Tensor<float> dy2({n, t, 2 * kHidden});
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < kHidden; ++j) {
      dy2.at3(i, t - 1, j) = dpooled.at2(i, j);
      dy2.at3(i, 0, kHidden + j) = dpooled.at2(i, kHidden + j);
    }
  return lstm1_.backward(lstm2_.backward(dy2));
}

std::vector<nn::Param<float>*> LstmClassifier::params() {
  std::vector<nn::Param<float>*> out;
  lstm1_.collect_params(out);
  lstm2_.collect_params(out);
  fc_.collect_params(out);
  return out;
}

std::vector<std::pair<std::string, nn::Tensor<float>*>> LstmClassifier::named_tensors() {
  std::vector<std::pair<std::string, nn::Tensor<float>*>> out;
  for (auto* p : params()) out.emplace_back(p->name, &p->value);
  return out;
}

size_t LstmClassifier::parameter_count() {
  size_t n = 0;
  for (auto* p : params()) n += p->value.numel();
  return n;
}

// ---------------------------------------------------------------------------
// CnnClassifier

CnnClassifier::CnnClassifier(bool full_depth)
    : full_(full_depth),
      stem_(3, kStageChannels[0], 7, 2, 3, false, "conv1"),
      bn1_(kStageChannels[0], "bn1"),
      pool_(3, 2, 1),
      fc_(kStageChannels[3], kClasses, "fc") {
  const auto counts = blocks_for(full_);
  size_t in_ch = kStageChannels[0];
  for (size_t stage = 0; stage < 4; ++stage) {
    const size_t out_ch = kStageChannels[stage];
    for (size_t b = 0; b < counts[stage]; ++b) {
      const size_t stride = (stage > 0 && b == 0) ? 2 : 1;
      std::string name = "layer" + std::to_string(stage + 1) + "." + std::to_string(b);
      blocks_.push_back(
          std::make_unique<nn::ResidualBlock<float>>(in_ch, out_ch, stride, name));
      in_ch = out_ch;
    }
  }
}

void CnnClassifier::init(Rng& rng) {
  stem_.init(rng);
  for (auto& b : blocks_) b->init(rng);
  fc_.init(rng);
}

nn::Tensor<float> CnnClassifier::forward(const nn::Tensor<float>& x,
                                         const nn::Context& ctx) {
  if (x.ndim() != 4 || x.dim(1) != 3 || x.dim(2) != x.dim(3))
    throw ShapeMismatch("CnnClassifier: expected batch x 3 x S x S input");
  if (x.dim(2) < kMinInput)
    throw ShapeMismatch("CnnClassifier: input side must be >= " +
                        std::to_string(kMinInput));
  nn::Tensor<float> h = pool_.forward(relu_.forward(bn1_.forward(stem_.forward(x, ctx), ctx), ctx), ctx);
  for (auto& b : blocks_) h = b->forward(h, ctx);
  return fc_.forward(gap_.forward(h, ctx), ctx);
}

nn::Tensor<float> CnnClassifier::backward(const nn::Tensor<float>& dlogits) {
  nn::Tensor<float> g = gap_.backward(fc_.backward(dlogits));
  for (size_t i = blocks_.size(); i-- > 0;) g = blocks_[i]->backward(g);
  return stem_.backward(bn1_.backward(relu_.backward(pool_.backward(g))));
}

std::vector<nn::Param<float>*> CnnClassifier::params() {
  std::vector<nn::Param<float>*> out;
  stem_.collect_params(out);
  bn1_.collect_params(out);
  for (auto& b : blocks_) b->collect_params(out);
  fc_.collect_params(out);
  return out;
}

std::vector<std::pair<std::string, nn::Tensor<float>*>> CnnClassifier::named_tensors() {
  std::vector<std::pair<std::string, nn::Tensor<float>*>> out;
  auto add_bn = [&](nn::BatchNorm2d<float>& bn, const std::string& prefix) {
    out.emplace_back(prefix + ".gamma", &bn.gamma().value);
    out.emplace_back(prefix + ".beta", &bn.beta().value);
    out.emplace_back(prefix + ".running_mean", &bn.running_mean());
    out.emplace_back(prefix + ".running_var", &bn.running_var());
  };
  out.emplace_back("conv1.weight", &stem_.weight().value);
  add_bn(bn1_, "bn1");
  const auto counts = blocks_for(full_);
  size_t bi = 0;
  for (size_t stage = 0; stage < 4; ++stage) {
    for (size_t b = 0; b < counts[stage]; ++b, ++bi) {
      auto& block = *blocks_[bi];
      std::string name = "layer" + std::to_string(stage + 1) + "." + std::to_string(b);
      out.emplace_back(name + ".conv1.weight", &block.conv1().weight().value);
      add_bn(block.bn1(), name + ".bn1");
      out.emplace_back(name + ".conv2.weight", &block.conv2().weight().value);
      add_bn(block.bn2(), name + ".bn2");
      if (block.projected()) {
        out.emplace_back(name + ".downsample.conv.weight", &block.proj_conv().weight().value);
        add_bn(block.proj_bn(), name + ".downsample.bn");
      }
    }
  }
  out.emplace_back("fc.weight", &fc_.weight().value);
  out.emplace_back("fc.bias", &fc_.bias().value);
  return out;
}

size_t CnnClassifier::parameter_count() {
  size_t n = 0;
  for (auto* p : params()) n += p->value.numel();
  return n;
}

std::vector<size_t> CnnClassifier::stage_blocks() const { return blocks_for(full_); }

// ---------------------------------------------------------------------------
// BuiltModel / checkpoints

std::vector<nn::Param<float>*> BuiltModel::params() {
  if (lstm) return lstm->params();
  if (cnn) return cnn->params();
  return {};
}

BuiltModel build_model(ModelKind kind, uint64_t seed) {
  BuiltModel m;
  m.kind = kind;
  Rng rng(splitmix64(seed ^ 0x1417a5));
  switch (kind) {
    case ModelKind::svm:
      break;  // parameters come from svm_train
    case ModelKind::lstm:
      m.lstm = std::make_unique<LstmClassifier>();
      m.lstm->init(rng);
      break;
    case ModelKind::cnn_lite:
    case ModelKind::cnn34:
      m.cnn = std::make_unique<CnnClassifier>(kind == ModelKind::cnn34);
      m.cnn->init(rng);
      break;
  }
  return m;
}

namespace {

FeatureTensor vec_to_tensor(const std::vector<double>& v, std::vector<size_t> dims) {
  FeatureTensor t(std::move(dims));
  for (size_t i = 0; i < v.size(); ++i) t.data[i] = static_cast<float>(v[i]);
  return t;
}

std::vector<double> tensor_to_vec(const FeatureTensor& t) {
  return std::vector<double>(t.data.begin(), t.data.end());
}

}  // namespace

Checkpoint to_checkpoint(BuiltModel& model) {
  Checkpoint ckpt;
  ckpt.kind = kind_name(model.kind);
  ckpt.meta["input_mean"] = double_str(model.input_mean);
  ckpt.meta["input_std"] = double_str(model.input_std);
  ckpt.meta["input_size"] = std::to_string(model.input_size);

  if (model.kind == ModelKind::svm) {
    const auto& svm = model.svm_model;
    ckpt.meta["gamma"] = double_str(svm.gamma);
    ckpt.meta["C"] = double_str(svm.c);
    ckpt.meta["dim"] = std::to_string(svm.dim);
    std::string classes;
    for (int c : svm.class_list) classes += (classes.empty() ? "" : ",") + std::to_string(c);
    ckpt.meta["classes"] = classes;
    if (!model.scaler.mean.empty()) {
      ckpt.add("scaler.mean", vec_to_tensor(model.scaler.mean, {svm.dim}));
      ckpt.add("scaler.std", vec_to_tensor(model.scaler.stddev, {svm.dim}));
    }
    for (const auto& p : svm.problems) {
      const std::string prefix = "svm.c" + std::to_string(p.positive_class);
      ckpt.add(prefix + ".support_vectors",
               vec_to_tensor(p.support_vectors, {p.n_sv, svm.dim}));
      ckpt.add(prefix + ".dual_coef", vec_to_tensor(p.dual_coef, {p.n_sv}));
      ckpt.add(prefix + ".bias", vec_to_tensor({p.bias}, {1}));
    }
    return ckpt;
  }

  auto named = model.lstm ? model.lstm->named_tensors() : model.cnn->named_tensors();
  for (auto& [name, tensor] : named) ckpt.add(name, nn::to_feature_tensor(*tensor));
  if (model.cnn) {
    const auto counts = model.cnn->stage_blocks();
    std::string blocks;
    for (size_t c : counts) blocks += (blocks.empty() ? "" : ",") + std::to_string(c);
    ckpt.meta["blocks"] = blocks;
  }
  return ckpt;
}

BuiltModel from_checkpoint(const Checkpoint& ckpt) {
  BuiltModel model = build_model(kind_from_name(ckpt.kind), 0);
  if (auto it = ckpt.meta.find("input_mean"); it != ckpt.meta.end())
    model.input_mean = std::stod(it->second);
  if (auto it = ckpt.meta.find("input_std"); it != ckpt.meta.end())
    model.input_std = std::stod(it->second);
  if (auto it = ckpt.meta.find("input_size"); it != ckpt.meta.end())
    model.input_size = std::stoull(it->second);

  if (model.kind == ModelKind::svm) {
    auto& svm = model.svm_model;
    svm.gamma = std::stod(ckpt.meta.at("gamma"));
    svm.c = std::stod(ckpt.meta.at("C"));
    svm.dim = std::stoull(ckpt.meta.at("dim"));
    for (const auto& s : split(ckpt.meta.at("classes"), ','))
      if (!s.empty()) svm.class_list.push_back(std::stoi(s));
    if (const auto* t = ckpt.find("scaler.mean")) model.scaler.mean = tensor_to_vec(*t);
    if (const auto* t = ckpt.find("scaler.std")) model.scaler.stddev = tensor_to_vec(*t);
    for (int c : svm.class_list) {
      const std::string prefix = "svm.c" + std::to_string(c);
      const auto* sv = ckpt.find(prefix + ".support_vectors");
      const auto* coef = ckpt.find(prefix + ".dual_coef");
      const auto* bias = ckpt.find(prefix + ".bias");
      if (!sv || !coef || !bias)
        throw MissingTensor("checkpoint lacks tensors for class " + std::to_string(c));
      svm::BinaryProblem p;
      p.positive_class = c;
      p.n_sv = sv->rows();
      p.support_vectors = tensor_to_vec(*sv);
      p.dual_coef = tensor_to_vec(*coef);
      p.bias = bias->data.at(0);
      svm.problems.push_back(std::move(p));
    }
    return model;
  }

  auto named = model.lstm ? model.lstm->named_tensors() : model.cnn->named_tensors();
  for (auto& [name, tensor] : named) {
    const auto* src = ckpt.find(name);
    if (!src) throw MissingTensor("checkpoint lacks tensor " + name);
    if (src->dims != tensor->dims) throw DimMismatch("tensor " + name + " dims differ");
    for (size_t i = 0; i < src->data.size(); ++i) tensor->v[i] = src->data[i];
  }
  return model;
}

ImportReport import_pretrained(const Checkpoint& source, CnnClassifier& target,
                               bool strict_head) {
  ImportReport report;
  for (auto& [name, tensor] : target.named_tensors()) {
    const bool is_head = name == "fc.weight" || name == "fc.bias";
    const auto* src = source.find(name);
    if (src == nullptr || src->dims != tensor->dims) {
      if (!is_head) {
        if (src == nullptr) throw MissingTensor("pretrained checkpoint lacks " + name);
        throw DimMismatch("pretrained tensor " + name + " dims differ");
      }
      if (strict_head) {
        if (src == nullptr) throw MissingTensor("pretrained checkpoint lacks " + name);
        throw DimMismatch("pretrained head tensor " + name + " dims differ");
      }
      report.skipped.push_back(name);  // head stays freshly initialized
      continue;
    }
    for (size_t i = 0; i < src->data.size(); ++i) tensor->v[i] = src->data[i];
    report.matched.push_back(name);
  }
  return report;
}

ImportReport import_pretrained(const std::filesystem::path& ckpt_file,
                               CnnClassifier& target, bool strict_head) {
  return import_pretrained(load_checkpoint(ckpt_file), target, strict_head);
}

// ---------------------------------------------------------------------------
// Batch assembly and prediction

nn::Tensor<float> cnn_batch(const std::vector<const FeatureTensor*>& squares, double mean,
                            double stddev) {
  if (squares.empty()) throw ShapeMismatch("cnn_batch: empty batch");
  const size_t s = squares[0]->rows();
  if (squares[0]->cols() != s) throw ShapeMismatch("cnn_batch: inputs must be square");
  const float inv = static_cast<float>(1.0 / (stddev > 0 ? stddev : 1.0));
  const float mu = static_cast<float>(mean);

  nn::Tensor<float> batch({squares.size(), 3, s, s});
  for (size_t i = 0; i < squares.size(); ++i) {
    const auto& sq = *squares[i];
    if (sq.rows() != s || sq.cols() != s) throw ShapeMismatch("cnn_batch: mixed dims");
    float* base = batch.data() + i * 3 * s * s;
    for (size_t p = 0; p < s * s; ++p) {
      const float v = (sq.data[p] - mu) * inv;
      base[p] = v;
      base[s * s + p] = v;
      base[2 * s * s + p] = v;
    }
  }
  return batch;
}

nn::Tensor<float> lstm_batch(const std::vector<const FeatureTensor*>& seqs, double mean,
                             double stddev) {
  if (seqs.empty()) throw ShapeMismatch("lstm_batch: empty batch");
  const size_t t = seqs[0]->rows(), d = seqs[0]->cols();
  const float inv = static_cast<float>(1.0 / (stddev > 0 ? stddev : 1.0));
  const float mu = static_cast<float>(mean);

  nn::Tensor<float> batch({seqs.size(), t, d});
  for (size_t i = 0; i < seqs.size(); ++i) {
    const auto& seq = *seqs[i];
    if (seq.rows() != t || seq.cols() != d) throw ShapeMismatch("lstm_batch: mixed dims");
    float* base = batch.data() + i * t * d;
    for (size_t p = 0; p < t * d; ++p) base[p] = (seq.data[p] - mu) * inv;
  }
  return batch;
}

int SvmPredictor::predict(const FeatureTensor& features) {
  const FeatureTensor pooled =
      features.dims.size() == 2 ? dsp::mean_pool_time(features) : features;
  if (pooled.data.size() != model_.svm_model.dim)
    throw ShapeMismatch("SvmPredictor: feature dim " + std::to_string(pooled.data.size()) +
                        " != model dim " + std::to_string(model_.svm_model.dim));
  std::vector<double> row(pooled.data.begin(), pooled.data.end());
  row = model_.scaler.transform(row, 1, row.size());
  return svm::svm_predict(model_.svm_model, row, 1).labels[0];
}

std::vector<double> NnPredictor::logits(const FeatureTensor& features) {
  nn::Context ctx{nn::Mode::infer, nullptr};
  nn::Tensor<float> out;
  if (model_.lstm) {
    if (features.dims.size() != 2 || features.cols() != LstmClassifier::kInputDim)
      throw ShapeMismatch("NnPredictor: expected frames x 128 features");
    out = model_.lstm->forward(lstm_batch({&features}, model_.input_mean, model_.input_std),
                               ctx);
  } else if (model_.cnn) {
    const FeatureTensor square = augment::to_model_square(features, model_.input_size);
    out = model_.cnn->forward(cnn_batch({&square}, model_.input_mean, model_.input_std), ctx);
  } else {
    throw ShapeMismatch("NnPredictor: model has no network");
  }
  return std::vector<double>(out.v.begin(), out.v.end());
}

int NnPredictor::predict(const FeatureTensor& features) {
  const auto scores = logits(features);
  size_t best = 0;
  for (size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return static_cast<int>(best);
}

}  // namespace serkit::models
