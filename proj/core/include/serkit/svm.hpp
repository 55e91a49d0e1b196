#pragma once

#include <cstdint>
#include <vector>

namespace serkit::svm {

// exp(-gamma * ||u - v||^2)
double rbf_kernel(const double* u, const double* v, size_t d, double gamma);

// Scale heuristic: 1 / (d * variance of all feature entries).
double suggest_gamma(const std::vector<double>& x, size_t n, size_t d);

// Per-dimension zero-mean unit-variance scaling fitted on training data.
// Dimensions with (near-)zero variance are passed through unscaled.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  void fit(const std::vector<double>& x, size_t n, size_t d);
  std::vector<double> transform(const std::vector<double>& x, size_t n, size_t d) const;
};

// One binary one-vs-rest problem after training: the support set, the signed
// dual coefficients alpha_i * y_i, and the bias of f(x) = sum coef K + bias.
struct BinaryProblem {
  int positive_class = 0;
  size_t n_sv = 0;
  std::vector<double> support_vectors;  // n_sv x dim, row-major
  std::vector<double> dual_coef;        // n_sv
  double bias = 0.0;
};

struct SvmModel {
  size_t dim = 0;
  double c = 1.0;
  double gamma = 1.0;
  std::vector<int> class_list;  // ascending class codes seen in training
  std::vector<BinaryProblem> problems;
};

// Optional per-problem convergence evidence, filled when requested.
struct SmoDiagnostics {
  size_t total_steps = 0;
  double kkt_max_violation = 0.0;          // recomputed from scratch at convergence
  std::vector<double> objective_trace;     // dual objective after each step (first problem)
};

// One-vs-rest RBF SVM trained with sequential minimal optimization. Each
// binary subproblem is optimized until every KKT violation is within tol.
// Throws SingleClass when fewer than 2 labels are present and
// NonFiniteFeature on bad inputs.
SvmModel svm_train(const std::vector<double>& x, size_t n, size_t d,
                   const std::vector<int>& labels, double c, double gamma,
                   double tol = 1e-3, SmoDiagnostics* diag = nullptr);

struct SvmPrediction {
  std::vector<int> labels;    // m
  std::vector<double> scores; // m x class_list.size(), row-major decision values
};

// Argmax over one-vs-rest decision values; ties break toward the lowest
// class code.
SvmPrediction svm_predict(const SvmModel& model, const std::vector<double>& x, size_t m);

// Decision value of one binary problem for a single example.
double decision_value(const SvmModel& model, const BinaryProblem& p, const double* row);

}  // namespace serkit::svm
