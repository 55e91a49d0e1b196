#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "serkit/checkpoint.hpp"
#include "serkit/nn/layers.hpp"
#include "serkit/nn/lstm.hpp"
#include "serkit/svm.hpp"
#include "serkit/tensor.hpp"

namespace serkit::models {

enum class ModelKind { svm, lstm, cnn_lite, cnn34 };

const std::string& kind_name(ModelKind kind);
ModelKind kind_from_name(const std::string& name);
bool is_cnn(ModelKind kind);

// Two stacked bidirectional LSTM layers, dropout, and an 8-way linear head.
// The head reads the last-step forward state concatenated with the
// first-step backward state.
class LstmClassifier {
 public:
  static constexpr size_t kInputDim = 128;
  static constexpr size_t kHidden = 128;
  static constexpr double kDropout = 0.5;
  static constexpr size_t kClasses = 8;

  LstmClassifier();
  void init(Rng& rng);

  nn::Tensor<float> forward(const nn::Tensor<float>& x, const nn::Context& ctx);
  nn::Tensor<float> backward(const nn::Tensor<float>& dlogits);
  std::vector<nn::Param<float>*> params();
  std::vector<std::pair<std::string, nn::Tensor<float>*>> named_tensors();
  size_t parameter_count();

 private:
  nn::BiLstm<float> lstm1_;
  nn::BiLstm<float> lstm2_;
  nn::Dropout<float> dropout_;
  nn::Dense<float> fc_;
  size_t last_t_ = 0;
};

// Residual CNN over 3-channel square inputs (>= 64 px). Stage block counts
// are [3,4,6,3] for the full depth-34 network and [1,1,1,1] for the reduced
// desk-scale variant; both end in global average pooling and an 8-way head,
// so they accept any admissible input size without surgery.
class CnnClassifier {
 public:
  static constexpr size_t kClasses = 8;
  static constexpr size_t kMinInput = 64;

  explicit CnnClassifier(bool full_depth);
  void init(Rng& rng);

  nn::Tensor<float> forward(const nn::Tensor<float>& x, const nn::Context& ctx);
  nn::Tensor<float> backward(const nn::Tensor<float>& dlogits);
  std::vector<nn::Param<float>*> params();
  std::vector<std::pair<std::string, nn::Tensor<float>*>> named_tensors();
  size_t parameter_count();
  std::vector<size_t> stage_blocks() const;
  bool full_depth() const { return full_; }

 private:
  bool full_;
  nn::Conv2d<float> stem_;
  nn::BatchNorm2d<float> bn1_;
  nn::Relu<float> relu_;
  nn::MaxPool2d<float> pool_;
  std::vector<std::unique_ptr<nn::ResidualBlock<float>>> blocks_;
  nn::GlobalAvgPool<float> gap_;
  nn::Dense<float> fc_;
};

// A built (possibly untrained) model of any family plus the input scaling
// it expects.
struct BuiltModel {
  ModelKind kind = ModelKind::svm;
  std::unique_ptr<LstmClassifier> lstm;
  std::unique_ptr<CnnClassifier> cnn;
  svm::SvmModel svm_model;
  svm::Standardizer scaler;

  double input_mean = 0.0;
  double input_std = 1.0;
  size_t input_size = 128;  // square side for CNN inputs

  std::vector<nn::Param<float>*> params();
};

// Fresh parameters, deterministic per seed.
BuiltModel build_model(ModelKind kind, uint64_t seed);

Checkpoint to_checkpoint(BuiltModel& model);
BuiltModel from_checkpoint(const Checkpoint& ckpt);

struct ImportReport {
  std::vector<std::string> matched;
  std::vector<std::string> skipped;
};

// Copies every tensor whose name and dims match the target network. The
// 8-way head is re-initialized (i.e. left at the target's fresh values)
// whenever the source head has different dims; with strict_head that is an
// error instead. Missing non-head tensors raise MissingTensor, dim conflicts
// raise DimMismatch.
ImportReport import_pretrained(const Checkpoint& source, CnnClassifier& target,
                               bool strict_head = false);
ImportReport import_pretrained(const std::filesystem::path& ckpt_file, CnnClassifier& target,
                               bool strict_head = false);

// Batch assembly. Inputs must already share dims; values are scaled by
// (v - mean) / stddev. CNN batches replicate the single log-mel plane to
// 3 channels.
nn::Tensor<float> cnn_batch(const std::vector<const FeatureTensor*>& squares, double mean,
                            double stddev);
nn::Tensor<float> lstm_batch(const std::vector<const FeatureTensor*>& seqs, double mean,
                             double stddev);

// Classifier-agnostic prediction surface used by evaluation.
struct Predictor {
  virtual ~Predictor() = default;
  // Returns the predicted class code for one clip's feature tensor.
  virtual int predict(const FeatureTensor& features) = 0;
};

class SvmPredictor : public Predictor {
 public:
  explicit SvmPredictor(const BuiltModel& model) : model_(model) {}
  int predict(const FeatureTensor& features) override;

 private:
  const BuiltModel& model_;
};

class NnPredictor : public Predictor {
 public:
  explicit NnPredictor(BuiltModel& model) : model_(model) {}
  int predict(const FeatureTensor& features) override;
  // Inference-mode logits for one clip.
  std::vector<double> logits(const FeatureTensor& features);

 private:
  BuiltModel& model_;
};

}  // namespace serkit::models
