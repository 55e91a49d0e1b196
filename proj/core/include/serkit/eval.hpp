#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "serkit/dataset.hpp"
#include "serkit/models.hpp"
#include "serkit/pipeline.hpp"

namespace serkit::eval {

using Confusion = std::array<std::array<uint64_t, dataset::kNumClasses>,
                             dataset::kNumClasses>;  // rows true, cols predicted

struct ClassMetrics {
  int label = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t support = 0;
};

struct EvalReport {
  size_t n_examples = 0;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;  // all 8 classes, in code order
  double macro_f1 = 0.0;                // mean over classes with support > 0
  Confusion confusion = {};
  size_t zero_division_count = 0;  // 0/0 precision or recall cases defined as 0
};

// Precision = diag/col-sum, recall = diag/row-sum, f1 their harmonic mean;
// 0/0 is defined as 0 and counted. Throws EmptyMatrix when total is zero.
EvalReport metrics_from_confusion(const Confusion& confusion);

// Inference over one split of the manifest. Deterministic; order-independent.
EvalReport evaluate(models::Predictor& predictor,
                    const std::vector<dataset::ManifestEntry>& entries,
                    dataset::Split split, const FeatureStore& store);

// Writes metrics.csv, confusion.csv and report.txt. Throws IoError.
void emit_report(const EvalReport& report, const std::filesystem::path& out_dir);

Confusion parse_confusion_csv(const std::string& body);

}  // namespace serkit::eval
