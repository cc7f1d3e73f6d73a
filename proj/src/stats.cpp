#include "regionwise/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "json.hpp"

#include "regionwise/errors.hpp"
#include "regionwise/rng.hpp"

namespace regionwise {

const char* diagnosis_name(Diagnosis d) {
  switch (d) {
    case Diagnosis::CN: return "CN";
    case Diagnosis::MCI: return "MCI";
    case Diagnosis::AD: return "AD";
  }
  return "?";
}

Diagnosis diagnosis_from_string(const std::string& s) {
  if (s == "CN") return Diagnosis::CN;
  if (s == "MCI") return Diagnosis::MCI;
  if (s == "AD") return Diagnosis::AD;
  throw InputError("unknown diagnosis: " + s);
}

const char* task_name(Task t) {
  switch (t) {
    case Task::AD_vs_CN: return "AD_vs_CN";
    case Task::AD_vs_MCI: return "AD_vs_MCI";
    case Task::MCI_vs_CN: return "MCI_vs_CN";
  }
  return "?";
}

const char* feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::GlobalWMH: return "GlobalWMH";
    case FeatureKind::RegionalWMH: return "RegionalWMH";
    case FeatureKind::BrainVolumes: return "BrainVolumes";
    case FeatureKind::Combined: return "Combined";
  }
  return "?";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "GlobalWMH") return FeatureKind::GlobalWMH;
  if (s == "RegionalWMH") return FeatureKind::RegionalWMH;
  if (s == "BrainVolumes") return FeatureKind::BrainVolumes;
  if (s == "Combined") return FeatureKind::Combined;
  throw InputError("unknown feature kind: " + s);
}

void CohortTable::validate() const {
  std::set<std::string> seen;
  for (const CohortRow& row : rows) {
    if (!seen.insert(row.subject_id).second) {
      throw InputError("duplicate subject id: " + row.subject_id);
    }
    if (row.global_wmh < 0.0) throw InputError("negative global volume for " + row.subject_id);
    for (double v : row.regional_wmh) {
      if (v < 0.0) throw InputError("negative regional volume for " + row.subject_id);
    }
    if (row.brain_volumes) {
      for (double v : *row.brain_volumes) {
        if (v < 0.0) throw InputError("negative brain volume for " + row.subject_id);
      }
    }
  }
}

namespace {

const std::array<const char*, 4> kBrainFeatureNames = {"hippocampus", "csf", "white_matter",
                                                       "gray_matter"};

std::string region_feature_name(int region) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "region_%02d", region);
  return buf;
}

}  // namespace

FeatureSet build_feature_set(const CohortTable& cohort, FeatureKind kind) {
  FeatureSet set;
  set.kind = kind;
  set.n = cohort.rows.size();

  const bool wants_regional = kind == FeatureKind::RegionalWMH || kind == FeatureKind::Combined;
  const bool wants_brain = kind == FeatureKind::BrainVolumes || kind == FeatureKind::Combined;

  if (kind == FeatureKind::GlobalWMH) {
    set.feature_names.push_back("global_wmh");
  }
  if (wants_regional) {
    for (int r = 1; r <= kNumRegions; ++r) set.feature_names.push_back(region_feature_name(r));
  }
  if (wants_brain) {
    for (const char* name : kBrainFeatureNames) set.feature_names.push_back(name);
  }
  set.p = set.feature_names.size();
  set.matrix.reserve(set.n * set.p);

  for (const CohortRow& row : cohort.rows) {
    if (kind == FeatureKind::GlobalWMH) set.matrix.push_back(row.global_wmh);
    if (wants_regional) {
      set.matrix.insert(set.matrix.end(), row.regional_wmh.begin(), row.regional_wmh.end());
    }
    if (wants_brain) {
      if (!row.brain_volumes) {
        throw InputError("brain volumes missing for " + row.subject_id);
      }
      set.matrix.insert(set.matrix.end(), row.brain_volumes->begin(), row.brain_volumes->end());
    }
  }
  return set;
}

namespace {

// In-place Gauss-Jordan inversion with partial pivoting; returns false on a
// vanishing pivot instead of throwing so callers can fall back to ridge.
bool invert_in_place(std::vector<double>& a, std::size_t m) {
  std::vector<double> inv(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) inv[i * m + i] = 1.0;

  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::fabs(a[r * m + col]) > std::fabs(a[pivot * m + col])) pivot = r;
    }
    if (std::fabs(a[pivot * m + col]) < 1e-300) return false;
    if (pivot != col) {
      for (std::size_t c = 0; c < m; ++c) {
        std::swap(a[pivot * m + c], a[col * m + c]);
        std::swap(inv[pivot * m + c], inv[col * m + c]);
      }
    }
    const double scale = 1.0 / a[col * m + col];
    for (std::size_t c = 0; c < m; ++c) {
      a[col * m + c] *= scale;
      inv[col * m + c] *= scale;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double factor = a[r * m + col];
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < m; ++c) {
        a[r * m + c] -= factor * a[col * m + c];
        inv[r * m + c] -= factor * inv[col * m + c];
      }
    }
  }
  a = std::move(inv);
  return true;
}

double one_norm(const std::vector<double>& a, std::size_t m) {
  double best = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    double col_sum = 0.0;
    for (std::size_t r = 0; r < m; ++r) col_sum += std::fabs(a[r * m + c]);
    best = std::max(best, col_sum);
  }
  return best;
}

}  // namespace

LinearModel fit_linear_model(const std::vector<double>& X, std::size_t n, std::size_t p,
                             const std::vector<double>& y) {
  if (p == 0) throw InputError("at least one feature is required");
  if (X.size() != n * p || y.size() != n) throw InputError("design matrix shape mismatch");
  std::size_t positives = 0;
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw InputError("labels must be 0 or 1");
    if (v == 1.0) ++positives;
  }
  if (positives == 0 || positives == n) {
    throw DegenerateLabelError("both classes must be present");
  }
  if (n < p + 2) throw UnderdeterminedError("need at least p + 2 rows to fit p features");

  LinearModel model;
  model.feature_means.resize(p);
  model.feature_sds.resize(p);
  model.zero_variance_columns.assign(p, false);

  for (std::size_t j = 0; j < p; ++j) {
    bool all_equal = true;
    for (std::size_t i = 1; i < n; ++i) {
      if (X[i * p + j] != X[j]) {
        all_equal = false;
        break;
      }
    }
    if (all_equal) {
      // Centering by the shared value zeroes the column exactly.
      model.feature_means[j] = X[j];
      model.feature_sds[j] = 1.0;
      model.zero_variance_columns[j] = true;
      continue;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += X[i * p + j];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = X[i * p + j] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    model.feature_means[j] = mean;
    if (sd == 0.0) {
      model.feature_sds[j] = 1.0;
      model.zero_variance_columns[j] = true;
    } else {
      model.feature_sds[j] = sd;
    }
  }

  // Z has the intercept column first, then standardized features.
  const std::size_t m = p + 1;
  std::vector<double> Z(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    Z[i * m] = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      Z[i * m + 1 + j] = (X[i * p + j] - model.feature_means[j]) / model.feature_sds[j];
    }
  }

  std::vector<double> gram(m * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < m; ++r) {
      const double zr = Z[i * m + r];
      if (zr == 0.0) continue;
      for (std::size_t c = r; c < m; ++c) gram[r * m + c] += zr * Z[i * m + c];
    }
  }
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < r; ++c) gram[r * m + c] = gram[c * m + r];
  }

  std::vector<double> rhs(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < m; ++r) rhs[r] += Z[i * m + r] * y[i];
  }

  double trace = 0.0;
  for (std::size_t r = 0; r < m; ++r) trace += gram[r * m + r];

  std::vector<double> gram_inv = gram;
  bool ok = invert_in_place(gram_inv, m);
  double cond = std::numeric_limits<double>::infinity();
  if (ok) cond = one_norm(gram, m) * one_norm(gram_inv, m);
  if (!ok || cond > 1e12) {
    const double lambda = 1e-8 * trace / static_cast<double>(p);
    for (std::size_t r = 0; r < m; ++r) gram[r * m + r] += lambda;
    gram_inv = gram;
    if (!invert_in_place(gram_inv, m)) {
      throw SingularityError("normal equations are singular even after ridge fallback");
    }
    model.regularized = true;
  }

  std::vector<double> beta(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m; ++c) acc += gram_inv[r * m + c] * rhs[c];
    beta[r] = acc;
  }

  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    for (std::size_t r = 0; r < m; ++r) pred += Z[i * m + r] * beta[r];
    const double resid = y[i] - pred;
    rss += resid * resid;
  }

  model.degrees_of_freedom = static_cast<int>(n - p - 1);
  model.residual_variance = rss / static_cast<double>(model.degrees_of_freedom);
  model.intercept = beta[0];
  model.coefficients.assign(beta.begin() + 1, beta.end());

  model.standard_errors.resize(m);
  model.t_statistics.resize(m);
  model.p_values.resize(m);
  for (std::size_t r = 0; r < m; ++r) {
    const double var = model.residual_variance * std::max(gram_inv[r * m + r], 0.0);
    const double se = std::sqrt(var);
    model.standard_errors[r] = se;
    if (se == 0.0) {
      // Degenerate: an exact fit makes the test vacuous.
      model.t_statistics[r] = 0.0;
      model.p_values[r] = beta[r] == 0.0 ? 1.0 : 0.0;
    } else {
      model.t_statistics[r] = beta[r] / se;
      model.p_values[r] = student_t_sf(model.t_statistics[r], model.degrees_of_freedom);
    }
  }
  return model;
}

double LinearModel::predict_one(const double* features) const {
  double score = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    score += coefficients[j] * (features[j] - feature_means[j]) / feature_sds[j];
  }
  return score;
}

std::vector<double> LinearModel::predict(const FeatureSet& features) const {
  if (features.p != coefficients.size()) throw InputError("feature count mismatch in predict");
  std::vector<double> scores(features.n);
  for (std::size_t i = 0; i < features.n; ++i) {
    scores[i] = predict_one(features.matrix.data() + i * features.p);
  }
  return scores;
}

namespace {

// Continued-fraction kernel for the regularized incomplete beta function
// (modified Lentz method).
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr int kMaxIter = 1000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int iter = 1; iter <= kMaxIter; ++iter) {
    const int m2 = 2 * iter;
    double aa = iter * (b - iter) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + iter) * (qab + iter) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-14) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_sf(double t, int df) {
  if (!std::isfinite(t)) throw NumericError("t statistic must be finite");
  if (df < 1) throw ParameterError("degrees of freedom must be >= 1");
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  double p = regularized_incomplete_beta(df / 2.0, 0.5, x);
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return p;
}

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<double>& labels) {
  if (scores.size() != labels.size()) throw InputError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) throw InputError("labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw NumericError("scores must be finite");
    if (labels[i] == 1.0) ++n_pos;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DegenerateLabelError("both classes required for a ROC curve");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  RocCurve curve;
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());

  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < n) {
    const double score = scores[order[i]];
    std::size_t j = i;
    // Tied positives and negatives enter together, giving a diagonal step.
    while (j < n && scores[order[j]] == score) {
      if (labels[order[j]] == 1.0) {
        ++tp;
      } else {
        ++fp;
      }
      ++j;
    }
    curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(n_neg));
    curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(n_pos));
    curve.thresholds.push_back(score);
    i = j;
  }

  double auc = 0.0;
  for (std::size_t s = 1; s < curve.fpr.size(); ++s) {
    auc += (curve.fpr[s] - curve.fpr[s - 1]) * (curve.tpr[s] + curve.tpr[s - 1]) / 2.0;
  }
  curve.auc = auc;
  return curve;
}

void write_roc_csv(std::ostream& os, const RocCurve& curve) {
  os << "fpr,tpr,threshold\n";
  char buf[96];
  for (std::size_t i = 0; i < curve.fpr.size(); ++i) {
    if (std::isinf(curve.thresholds[i])) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,inf\n", curve.fpr[i], curve.tpr[i]);
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", curve.fpr[i], curve.tpr[i],
                    curve.thresholds[i]);
    }
    os << buf;
  }
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k,
                                                    const std::vector<double>& labels,
                                                    std::uint64_t seed) {
  if (k < 2) throw ParameterError("k must be >= 2");
  if (labels.size() != n) throw InputError("label count does not match n");

  std::vector<std::size_t> class0;
  std::vector<std::size_t> class1;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == 0.0) {
      class0.push_back(i);
    } else if (labels[i] == 1.0) {
      class1.push_back(i);
    } else {
      throw InputError("labels must be 0 or 1");
    }
  }
  if (class0.size() < static_cast<std::size_t>(k) || class1.size() < static_cast<std::size_t>(k)) {
    throw StratificationError("each class needs at least k members");
  }

  Lcg64 rng(seed);
  rng.shuffle(class0);
  rng.shuffle(class1);

  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  // The dealing cursor carries across classes so fold sizes stay within 1.
  std::size_t cursor = 0;
  for (std::size_t idx : class0) {
    folds[cursor].push_back(idx);
    cursor = (cursor + 1) % static_cast<std::size_t>(k);
  }
  for (std::size_t idx : class1) {
    folds[cursor].push_back(idx);
    cursor = (cursor + 1) % static_cast<std::size_t>(k);
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

BlandAltman bland_altman(const std::vector<double>& pred, const std::vector<double>& ref) {
  if (pred.size() != ref.size()) throw InputError("prediction and reference differ in length");
  const std::size_t n = pred.size();
  if (n < 2) throw SampleSizeError("Bland-Altman needs at least 2 pairs");

  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = pred[i] - ref[i];

  double sum = 0.0;
  for (double d : diff) sum += d;
  const double bias = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double d : diff) ss += (d - bias) * (d - bias);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  BlandAltman ba;
  ba.n = n;
  ba.bias = bias;
  ba.sd_diff = sd;
  ba.loa_low = bias - 1.96 * sd;
  ba.loa_high = bias + 1.96 * sd;
  std::size_t within = 0;
  for (double d : diff) {
    if (d >= ba.loa_low && d <= ba.loa_high) ++within;
  }
  ba.fraction_within_loa = static_cast<double>(within) / static_cast<double>(n);
  return ba;
}

namespace {

Diagnosis positive_class(Task task) {
  return task == Task::MCI_vs_CN ? Diagnosis::MCI : Diagnosis::AD;
}

Diagnosis negative_class(Task task) {
  return task == Task::AD_vs_MCI ? Diagnosis::MCI : Diagnosis::CN;
}

}  // namespace

TaskReport evaluate_task(const CohortTable& cohort, Task task, FeatureKind kind, int k,
                         std::uint64_t seed) {
  const Diagnosis pos = positive_class(task);
  const Diagnosis neg = negative_class(task);

  CohortTable subset;
  for (const CohortRow& row : cohort.rows) {
    if (row.diagnosis == pos || row.diagnosis == neg) subset.rows.push_back(row);
  }
  const std::size_t n = subset.rows.size();

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = subset.rows[i].diagnosis == pos ? 1.0 : 0.0;

  const FeatureSet features = build_feature_set(subset, kind);
  const auto folds = kfold_indices(n, k, y, seed);

  TaskReport report;
  report.task = task;
  report.kind = kind;
  report.folds = k;
  report.seed = seed;

  std::vector<double> pooled_scores(n, 0.0);
  for (const auto& test : folds) {
    std::vector<bool> in_test(n, false);
    for (std::size_t idx : test) in_test[idx] = true;

    std::vector<double> x_train;
    std::vector<double> y_train;
    x_train.reserve((n - test.size()) * features.p);
    for (std::size_t i = 0; i < n; ++i) {
      if (in_test[i]) continue;
      const double* row = features.matrix.data() + i * features.p;
      x_train.insert(x_train.end(), row, row + features.p);
      y_train.push_back(y[i]);
    }
    const LinearModel fold_model =
        fit_linear_model(x_train, y_train.size(), features.p, y_train);

    std::vector<double> test_scores;
    std::vector<double> test_labels;
    test_scores.reserve(test.size());
    for (std::size_t idx : test) {
      const double score = fold_model.predict_one(features.matrix.data() + idx * features.p);
      pooled_scores[idx] = score;
      test_scores.push_back(score);
      test_labels.push_back(y[idx]);
    }
    report.per_fold_auc.push_back(roc_curve(test_scores, test_labels).auc);
  }

  report.pooled_curve = roc_curve(pooled_scores, y);
  report.pooled_auc = report.pooled_curve.auc;

  report.full_model = fit_linear_model(features.matrix, n, features.p, y);
  report.in_sample_auc = roc_curve(report.full_model.predict(features), y).auc;

  for (std::size_t j = 0; j < features.p; ++j) {
    CoefficientEntry entry;
    entry.name = features.feature_names[j];
    entry.coefficient = report.full_model.coefficients[j];
    entry.standard_error = report.full_model.standard_errors[j + 1];
    entry.t_statistic = report.full_model.t_statistics[j + 1];
    entry.p_value = report.full_model.p_values[j + 1];
    if (entry.p_value < 0.05) report.significant_features.push_back(entry.name);
    report.coefficients.push_back(std::move(entry));
  }
  return report;
}

std::string task_report_json(const TaskReport& report) {
  nlohmann::ordered_json j;
  j["task"] = task_name(report.task);
  j["feature_kind"] = feature_kind_name(report.kind);
  j["folds"] = report.folds;
  j["seed"] = report.seed;
  j["per_fold_auc"] = report.per_fold_auc;
  j["pooled_auc"] = report.pooled_auc;
  j["in_sample_auc"] = report.in_sample_auc;
  j["regularized"] = report.full_model.regularized;
  j["intercept"] = {
      {"coefficient", report.full_model.intercept},
      {"standard_error", report.full_model.standard_errors[0]},
      {"t", report.full_model.t_statistics[0]},
      {"p_value", report.full_model.p_values[0]},
  };
  nlohmann::ordered_json coeffs = nlohmann::ordered_json::object();
  for (const CoefficientEntry& entry : report.coefficients) {
    coeffs[entry.name] = {
        {"coefficient", entry.coefficient},
        {"standard_error", entry.standard_error},
        {"t", entry.t_statistic},
        {"p_value", entry.p_value},
    };
  }
  j["coefficients"] = std::move(coeffs);
  j["significant_regions"] = report.significant_features;
  return j.dump(2) + "\n";
}

}  // namespace regionwise
