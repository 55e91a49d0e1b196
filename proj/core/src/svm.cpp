#include "serkit/svm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "serkit/errors.hpp"
#include "serkit/rng.hpp"

namespace serkit::svm {

double rbf_kernel(const double* u, const double* v, size_t d, double gamma) {
  double dist2 = 0.0;
  for (size_t i = 0; i < d; ++i) {
    const double diff = u[i] - v[i];
    dist2 += diff * diff;
  }
  return std::exp(-gamma * dist2);
}

double suggest_gamma(const std::vector<double>& x, size_t n, size_t d) {
  if (n == 0 || d == 0) throw ShapeMismatch("suggest_gamma: empty features");
  double sum = 0.0, sq = 0.0;
  const size_t total = n * d;
  for (size_t i = 0; i < total; ++i) {
    sum += x[i];
    sq += x[i] * x[i];
  }
  const double mean = sum / total;
  const double var = std::max(sq / total - mean * mean, 1e-12);
  return 1.0 / (static_cast<double>(d) * var);
}

void Standardizer::fit(const std::vector<double>& x, size_t n, size_t d) {
  mean.assign(d, 0.0);
  stddev.assign(d, 1.0);
  if (n == 0) throw ShapeMismatch("Standardizer: no rows");
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) mean[j] += x[i * d + j];
  for (size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) {
      const double diff = x[i * d + j] - mean[j];
      var[j] += diff * diff;
    }
  for (size_t j = 0; j < d; ++j) {
    const double s = std::sqrt(var[j] / static_cast<double>(n));
    stddev[j] = s > 1e-12 ? s : 1.0;
  }
}

std::vector<double> Standardizer::transform(const std::vector<double>& x, size_t n,
                                            size_t d) const {
  if (mean.size() != d) throw ShapeMismatch("Standardizer: dimension mismatch");
  std::vector<double> out(n * d);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) out[i * d + j] = (x[i * d + j] - mean[j]) / stddev[j];
  return out;
}

namespace {

// SMO working state for one binary problem over a shared kernel matrix.
class SmoSolver {
 public:
  SmoSolver(const std::vector<double>& kernel, size_t n, const std::vector<int8_t>& y,
            double c, double tol, std::vector<double>* objective_trace)
      : k_(kernel), n_(n), y_(y), c_(c), tol_(tol), trace_(objective_trace),
        rng_(0x5e12c0de) {
    alpha_.assign(n, 0.0);
    error_.resize(n);
    for (size_t i = 0; i < n; ++i) error_[i] = -static_cast<double>(y_[i]);
  }

  // Platt's outer loop: sweep all examples, then only the non-bound set,
  // until a full sweep changes nothing.
  size_t solve() {
    size_t steps = 0;
    bool examine_all = true;
    size_t changed = 0;
    while (changed > 0 || examine_all) {
      changed = 0;
      for (size_t i = 0; i < n_; ++i) {
        if (!examine_all && !is_free(alpha_[i])) continue;
        changed += examine(i);
      }
      steps += changed;
      if (examine_all)
        examine_all = false;
      else if (changed == 0)
        examine_all = true;
      if (steps > 200000 * n_) break;  // safety stop; desk-scale problems converge long before
    }
    return steps;
  }

  const std::vector<double>& alpha() const { return alpha_; }
  double bias() const { return b_; }

  // Largest KKT violation, recomputed from the definition.
  double kkt_violation() const {
    double worst = 0.0;
    for (size_t i = 0; i < n_; ++i) {
      const double yf = y_[i] * f(i);
      if (alpha_[i] < 1e-12)
        worst = std::max(worst, 1.0 - yf);
      else if (alpha_[i] > c_ - 1e-12)
        worst = std::max(worst, yf - 1.0);
      else
        worst = std::max(worst, std::abs(yf - 1.0));
    }
    return worst;
  }

  double dual_objective() const {
    double obj = 0.0;
    for (size_t i = 0; i < n_; ++i) {
      if (alpha_[i] == 0.0) continue;
      obj += alpha_[i];
      for (size_t j = 0; j < n_; ++j) {
        if (alpha_[j] == 0.0) continue;
        obj -= 0.5 * alpha_[i] * alpha_[j] * y_[i] * y_[j] * k_[i * n_ + j];
      }
    }
    return obj;
  }

 private:
  static constexpr double kEps = 1e-12;

  bool is_free(double a) const { return a > kEps && a < c_ - kEps; }

  double f(size_t i) const {
    double acc = 0.0;
    for (size_t j = 0; j < n_; ++j)
      if (alpha_[j] > 0.0) acc += alpha_[j] * y_[j] * k_[j * n_ + i];
    return acc + b_;
  }

  size_t examine(size_t i2) {
    const double y2 = y_[i2], a2 = alpha_[i2], e2 = error_[i2];
    const double r2 = e2 * y2;
    const bool violates = (r2 < -tol_ && a2 < c_ - kEps) || (r2 > tol_ && a2 > kEps);
    if (!violates) return 0;

    // Second-choice heuristic: maximize |E1 - E2| over the free set.
    ptrdiff_t best = -1;
    double best_gap = 0.0;
    for (size_t i = 0; i < n_; ++i) {
      if (!is_free(alpha_[i])) continue;
      const double gap = std::abs(error_[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = static_cast<ptrdiff_t>(i);
      }
    }
    if (best >= 0 && take_step(static_cast<size_t>(best), i2)) return 1;

    const size_t start = static_cast<size_t>(rng_.uniform_int(n_));
    for (size_t k = 0; k < n_; ++k) {
      const size_t i1 = (start + k) % n_;
      if (is_free(alpha_[i1]) && take_step(i1, i2)) return 1;
    }
    for (size_t k = 0; k < n_; ++k) {
      const size_t i1 = (start + k) % n_;
      if (take_step(i1, i2)) return 1;
    }
    return 0;
  }

  bool take_step(size_t i1, size_t i2) {
    if (i1 == i2) return false;
    const double a1 = alpha_[i1], a2 = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double e1 = error_[i1], e2 = error_[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (s < 0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(c_, c_ + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - c_);
      hi = std::min(c_, a1 + a2);
    }
    if (hi - lo < kEps) return false;

    const double k11 = k_[i1 * n_ + i1];
    const double k12 = k_[i1 * n_ + i2];
    const double k22 = k_[i2 * n_ + i2];
    const double eta = k11 + k22 - 2.0 * k12;

    double a2new;
    if (eta > kEps) {
      a2new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Flat or degenerate direction: pick the better endpoint of the
      // restricted dual objective.
      const double lo_obj = line_objective(i1, i2, lo);
      const double hi_obj = line_objective(i1, i2, hi);
      if (lo_obj > hi_obj + kEps)
        a2new = lo;
      else if (hi_obj > lo_obj + kEps)
        a2new = hi;
      else
        return false;
    }
    if (std::abs(a2new - a2) < kEps * (a2new + a2 + kEps)) return false;
    const double a1new = a1 + s * (a2 - a2new);

    const double d1 = y1 * (a1new - a1), d2 = y2 * (a2new - a2);
    const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
    const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
    double bnew;
    if (is_free(a1new))
      bnew = b1;
    else if (is_free(a2new))
      bnew = b2;
    else
      bnew = 0.5 * (b1 + b2);

    const double db = bnew - b_;
    for (size_t i = 0; i < n_; ++i)
      error_[i] += d1 * k_[i1 * n_ + i] + d2 * k_[i2 * n_ + i] + db;

    alpha_[i1] = a1new;
    alpha_[i2] = a2new;
    b_ = bnew;
    if (trace_) trace_->push_back(dual_objective());
    return true;
  }

  // Dual objective restricted to the (i1, i2) line, as a function of the
  // candidate alpha2, up to terms constant along that line.
  double line_objective(size_t i1, size_t i2, double cand) const {
    const double a1 = alpha_[i1], a2 = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double s = y1 * y2;
    const double k11 = k_[i1 * n_ + i1];
    const double k12 = k_[i1 * n_ + i2];
    const double k22 = k_[i2 * n_ + i2];
    // Contribution of every other sample, extracted from the error cache.
    const double v1 = (error_[i1] + y1 - b_) - a1 * y1 * k11 - a2 * y2 * k12;
    const double v2 = (error_[i2] + y2 - b_) - a1 * y1 * k12 - a2 * y2 * k22;
    const double c1 = a1 + s * (a2 - cand);
    return c1 + cand - 0.5 * k11 * c1 * c1 - 0.5 * k22 * cand * cand -
           s * k12 * c1 * cand - y1 * c1 * v1 - y2 * cand * v2;
  }

  const std::vector<double>& k_;
  size_t n_;
  const std::vector<int8_t>& y_;
  double c_, tol_;
  std::vector<double>* trace_;
  Rng rng_;
  std::vector<double> alpha_;
  std::vector<double> error_;
  double b_ = 0.0;
};

}  // namespace

SvmModel svm_train(const std::vector<double>& x, size_t n, size_t d,
                   const std::vector<int>& labels, double c, double gamma, double tol,
                   SmoDiagnostics* diag) {
  if (n < 2 || d == 0 || x.size() != n * d || labels.size() != n)
    throw ShapeMismatch("svm_train: bad feature matrix");
  if (c <= 0.0 || gamma <= 0.0 || tol <= 0.0)
    throw ShapeMismatch("svm_train: C, gamma and tol must be positive");
  for (double v : x)
    if (!std::isfinite(v)) throw NonFiniteFeature("non-finite training feature");

  std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2) throw SingleClass("training data has a single label");

  // Shared kernel matrix across all one-vs-rest subproblems.
  std::vector<double> kernel(n * n);
  for (size_t i = 0; i < n; ++i) {
    kernel[i * n + i] = 1.0;
    for (size_t j = i + 1; j < n; ++j) {
      const double k = rbf_kernel(&x[i * d], &x[j * d], d, gamma);
      kernel[i * n + j] = k;
      kernel[j * n + i] = k;
    }
  }

  SvmModel model;
  model.dim = d;
  model.c = c;
  model.gamma = gamma;
  model.class_list.assign(classes.begin(), classes.end());

  if (diag) *diag = SmoDiagnostics{};
  bool first_problem = true;
  for (int cls : model.class_list) {
    std::vector<int8_t> y(n);
    for (size_t i = 0; i < n; ++i) y[i] = labels[i] == cls ? 1 : -1;

    std::vector<double>* trace =
        (diag && first_problem) ? &diag->objective_trace : nullptr;
    SmoSolver solver(kernel, n, y, c, tol, trace);
    const size_t steps = solver.solve();
    if (diag) {
      diag->total_steps += steps;
      diag->kkt_max_violation =
          std::max(diag->kkt_max_violation, solver.kkt_violation());
    }

    BinaryProblem p;
    p.positive_class = cls;
    p.bias = solver.bias();
    for (size_t i = 0; i < n; ++i) {
      if (solver.alpha()[i] > 1e-12) {
        p.support_vectors.insert(p.support_vectors.end(), x.begin() + i * d,
                                 x.begin() + (i + 1) * d);
        p.dual_coef.push_back(solver.alpha()[i] * y[i]);
        ++p.n_sv;
      }
    }
    model.problems.push_back(std::move(p));
    first_problem = false;
  }
  return model;
}

double decision_value(const SvmModel& model, const BinaryProblem& p, const double* row) {
  double acc = 0.0;
  for (size_t i = 0; i < p.n_sv; ++i)
    acc += p.dual_coef[i] *
           rbf_kernel(&p.support_vectors[i * model.dim], row, model.dim, model.gamma);
  return acc + p.bias;
}

SvmPrediction svm_predict(const SvmModel& model, const std::vector<double>& x, size_t m) {
  if (model.dim == 0 || x.size() != m * model.dim)
    throw ShapeMismatch("svm_predict: feature dims do not match training");

  SvmPrediction out;
  out.labels.resize(m);
  out.scores.assign(m * model.class_list.size(), 0.0);
  for (size_t i = 0; i < m; ++i) {
    int best_class = model.class_list.empty() ? 0 : model.class_list[0];
    double best = -1e300;
    for (size_t ci = 0; ci < model.problems.size(); ++ci) {
      const double v = decision_value(model, model.problems[ci], &x[i * model.dim]);
      out.scores[i * model.class_list.size() + ci] = v;
      if (v > best) {  // strict: ties keep the lowest class code
        best = v;
        best_class = model.class_list[ci];
      }
    }
    out.labels[i] = best_class;
  }
  return out;
}

}  // namespace serkit::svm
