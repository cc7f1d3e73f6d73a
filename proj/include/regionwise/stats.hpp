#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "regionwise/quantify.hpp"

namespace regionwise {

enum class Diagnosis { CN, MCI, AD };
enum class Task { AD_vs_CN, AD_vs_MCI, MCI_vs_CN };
enum class FeatureKind { GlobalWMH, RegionalWMH, BrainVolumes, Combined };

const char* diagnosis_name(Diagnosis d);
Diagnosis diagnosis_from_string(const std::string& s);
const char* task_name(Task t);
const char* feature_kind_name(FeatureKind k);
FeatureKind feature_kind_from_string(const std::string& s);

// One subject. brain_volumes is hippocampus, CSF, white matter, gray matter
// (in that order) and may be absent when the manifest does not carry them.
struct CohortRow {
  std::string subject_id;
  Diagnosis diagnosis = Diagnosis::CN;
  std::array<double, kNumRegions> regional_wmh{};
  double global_wmh = 0.0;
  std::optional<std::array<double, 4>> brain_volumes;
  std::optional<double> reference_wmh;
};

struct CohortTable {
  std::vector<CohortRow> rows;

  // Rejects duplicate subject ids, negative volumes.
  void validate() const;
};

// Design matrix with one row per cohort subject, row-major.
struct FeatureSet {
  FeatureKind kind = FeatureKind::GlobalWMH;
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> matrix;  // n * p
  std::vector<std::string> feature_names;

  double at(std::size_t row, std::size_t col) const { return matrix[row * p + col]; }
};

FeatureSet build_feature_set(const CohortTable& cohort, FeatureKind kind);

// OLS on z-scored features. The standard error / t / p arrays hold the
// intercept at index 0 followed by the p features.
struct LinearModel {
  std::vector<double> coefficients;  // per feature, in standardized units
  double intercept = 0.0;
  double residual_variance = 0.0;
  std::vector<double> standard_errors;
  std::vector<double> t_statistics;
  std::vector<double> p_values;
  int degrees_of_freedom = 0;
  std::vector<double> feature_means;
  std::vector<double> feature_sds;  // 1.0 for zero-variance columns
  std::vector<bool> zero_variance_columns;
  bool regularized = false;  // ridge fallback kicked in

  // Score for one subject given raw (unstandardized) features.
  double predict_one(const double* features) const;
  std::vector<double> predict(const FeatureSet& features) const;
};

// X is row-major n*p; y entries must be 0 or 1 with both classes present.
LinearModel fit_linear_model(const std::vector<double>& X, std::size_t n, std::size_t p,
                             const std::vector<double>& y);

// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees
// of freedom, via the regularized incomplete beta function.
double student_t_sf(double t, int df);

struct RocCurve {
  std::vector<double> fpr;
  std::vector<double> tpr;
  std::vector<double> thresholds;  // +inf for the initial (0,0) point
  double auc = 0.0;
};

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<double>& labels);

// fpr,tpr,threshold per row.
void write_roc_csv(std::ostream& os, const RocCurve& curve);

// Stratified seeded folds; returns k disjoint ascending test-index sets
// covering 0..n-1.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k,
                                                    const std::vector<double>& labels,
                                                    std::uint64_t seed);

struct BlandAltman {
  std::size_t n = 0;
  double bias = 0.0;
  double sd_diff = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
  double fraction_within_loa = 0.0;
};

BlandAltman bland_altman(const std::vector<double>& pred, const std::vector<double>& ref);

struct CoefficientEntry {
  std::string name;
  double coefficient = 0.0;
  double standard_error = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
};

struct TaskReport {
  Task task = Task::AD_vs_CN;
  FeatureKind kind = FeatureKind::GlobalWMH;
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<double> per_fold_auc;
  RocCurve pooled_curve;           // cross-validated test scores, pooled
  double pooled_auc = 0.0;
  double in_sample_auc = 0.0;
  LinearModel full_model;          // fit on all task rows, for significance
  std::vector<CoefficientEntry> coefficients;
  std::vector<std::string> significant_features;  // p < 0.05, intercept excluded
};

// Cross-validated evaluation of one task on one feature set. The headline
// AUC comes from pooled out-of-fold scores; the coefficient screen comes
// from a single fit on all task rows.
TaskReport evaluate_task(const CohortTable& cohort, Task task, FeatureKind kind, int k,
                         std::uint64_t seed);

// Pretty-printed JSON for a TaskReport. Key order is fixed so output is
// byte-stable across runs.
std::string task_report_json(const TaskReport& report);

}  // namespace regionwise
