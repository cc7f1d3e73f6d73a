// Command-line front end: registration, manifest-driven quantification,
// cohort statistics, agreement and distribution plots, and synthetic-data
// generation. Exit codes: 0 success, 1 I/O failure, 2 invalid input,
// 3 registration did not converge, 4 partial failure under --keep-going.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "regionwise/errors.hpp"
#include "regionwise/manifest.hpp"
#include "regionwise/nifti_io.hpp"
#include "regionwise/quantify.hpp"
#include "regionwise/registration.hpp"
#include "regionwise/resample.hpp"
#include "regionwise/stats.hpp"
#include "regionwise/svg.hpp"
#include "regionwise/synth.hpp"

namespace fs = std::filesystem;
using namespace regionwise;

namespace {

std::optional<std::uint64_t> seed_from_environment() {
  const char* env = std::getenv("REGIONWISE_SEED");
  if (!env || !*env) return std::nullopt;
  try {
    std::size_t consumed = 0;
    const std::uint64_t seed = std::stoull(env, &consumed);
    if (consumed != std::string(env).size()) throw std::invalid_argument(env);
    return seed;
  } catch (const std::exception&) {
    throw InputError(std::string("REGIONWISE_SEED is not a valid seed: ") + env);
  }
}

// ---------------------------------------------------------------- register

struct RegisterOptions {
  std::string moving;
  std::string fixed;
  std::string out_transform;
  int levels = 3;
  int max_iters = 200;
};

int cmd_register(const RegisterOptions& opt) {
  const Volume moving = read_nifti(opt.moving, Intent::intensity);
  const Volume fixed = read_nifti(opt.fixed, Intent::intensity);

  RegistrationConfig cfg;
  cfg.pyramid_levels = opt.levels;
  cfg.max_iters_per_level = opt.max_iters;
  const RegistrationResult result = register_affine(moving, fixed, cfg);

  write_affine_text(result.transform, opt.out_transform);
  std::printf("final_cost %.17g\n", result.final_cost);
  std::printf("iterations %d\n", result.iterations_used);
  std::printf("converged %s\n", result.converged ? "yes" : "no");
  return result.converged ? 0 : 3;
}

// ---------------------------------------------------------------- quantify

struct QuantifyOptions {
  std::string manifest;
  std::string out_report;
  double threshold = 0.5;
  int jobs = 0;  // 0 means hardware concurrency
  bool keep_going = false;
};

// Probability maps arrive as a single lesion channel; a two-class stack
// (background, lesion) turns modality fusion into the module's stack
// average.
ProbabilityStack lesion_stack(const Volume& prob) {
  Volume background(prob.dims, prob.spacing, prob.affine, Intent::probability);
  for (std::size_t i = 0; i < prob.voxel_count(); ++i) {
    background.data[i] = 1.0 - prob.data[i];
  }
  return ProbabilityStack({std::move(background), prob}, {"background", "lesion"});
}

class AtlasCache {
 public:
  std::shared_ptr<const LabelVolume> get(const std::string& path) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(path);
    if (it != cache_.end()) return it->second;
    auto atlas = std::make_shared<const LabelVolume>(read_nifti(path, Intent::labels));
    cache_.emplace(path, atlas);
    return atlas;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const LabelVolume>> cache_;
};

RegionReport quantify_subject(const ManifestRow& row, const std::string& manifest_path,
                              double threshold, AtlasCache& atlases) {
  const Volume flair =
      read_nifti(resolve_manifest_path(manifest_path, row.lesion_prob_flair_path),
                 Intent::probability);

  Volume lesion_prob;
  if (!row.lesion_prob_t1_path.empty()) {
    const Volume t1 = read_nifti(resolve_manifest_path(manifest_path, row.lesion_prob_t1_path),
                                 Intent::probability);
    FusionResult fused = fuse_probability_maps(lesion_stack(flair), lesion_stack(t1));
    lesion_prob = std::move(fused.fused_probs.channels[1]);
  } else {
    lesion_prob = flair;
  }
  const Volume mask = binarize_lesions(lesion_prob, threshold);

  const auto atlas = atlases.get(resolve_manifest_path(manifest_path, row.atlas_labels_path));
  AffineTransform transform;
  if (!row.affine_path.empty()) {
    transform = read_affine_text(resolve_manifest_path(manifest_path, row.affine_path));
  }
  const LabelVolume subject_atlas = propagate_atlas(*atlas, transform, mask.geometry());
  return regional_lesion_load(mask, subject_atlas, mask, row.subject_id);
}

int cmd_quantify(const QuantifyOptions& opt) {
  if (!(opt.threshold > 0.0 && opt.threshold < 1.0)) {
    throw ParameterError("--threshold must lie in (0,1)");
  }
  const std::vector<ManifestRow> rows = read_manifest(opt.manifest);
  if (rows.empty()) throw InputError("manifest has no subjects: " + opt.manifest);

  AtlasCache atlases;
  const std::size_t n = rows.size();
  std::vector<std::optional<RegionReport>> results(n);
  std::vector<std::string> failures(n);

  unsigned workers = opt.jobs > 0 ? static_cast<unsigned>(opt.jobs)
                                  : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

  std::atomic<std::size_t> cursor{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t idx = cursor.fetch_add(1);
      if (idx >= n) return;
      try {
        results[idx] = quantify_subject(rows[idx], opt.manifest, opt.threshold, atlases);
      } catch (const std::exception& e) {
        failures[idx] = e.what();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::size_t failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i]) continue;
    ++failed;
    std::fprintf(stderr, "error: subject %s: %s\n", rows[i].subject_id.c_str(),
                 failures[i].c_str());
    if (!opt.keep_going) return 2;
  }

  std::vector<RegionReport> reports;
  reports.reserve(n - failed);
  for (auto& r : results) {
    if (r) reports.push_back(std::move(*r));
  }
  write_region_report_csv(opt.out_report, reports);
  std::printf("quantified %zu/%zu subjects -> %s\n", n - failed, n, opt.out_report.c_str());
  return failed == 0 ? 0 : 4;
}

// ------------------------------------------------------------------ cohort

// Joins the quantification report with the manifest row-by-row; the two
// files must list the same subjects in the same order.
CohortTable join_cohort(const std::string& report_path, const std::string& manifest_path) {
  const std::vector<RegionReport> reports = read_region_report_csv(report_path);
  const std::vector<ManifestRow> rows = read_manifest(manifest_path);
  if (reports.size() != rows.size()) {
    throw InputError("report and manifest have different subject counts");
  }
  CohortTable cohort;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (reports[i].subject_id != rows[i].subject_id) {
      throw InputError("report and manifest subject ids do not align at row " +
                       std::to_string(i + 1) + ": " + reports[i].subject_id + " vs " +
                       rows[i].subject_id);
    }
    CohortRow row;
    row.subject_id = rows[i].subject_id;
    row.diagnosis = rows[i].diagnosis;
    row.regional_wmh = reports[i].per_region_mm3;
    row.global_wmh = reports[i].global_mm3;
    row.brain_volumes = rows[i].brain_volumes_mm3;
    row.reference_wmh = rows[i].reference_wmh_mm3;
    cohort.rows.push_back(std::move(row));
  }
  cohort.validate();
  return cohort;
}

struct CohortOptions {
  std::string report;
  std::string manifest;
  std::string task = "all";
  std::string features = "all";
  int folds = 5;
  std::uint64_t seed = 1234;
  std::string out_dir;
};

const char* kind_color(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::GlobalWMH: return "#1f77b4";
    case FeatureKind::RegionalWMH: return "#d62728";
    case FeatureKind::BrainVolumes: return "#2ca02c";
    case FeatureKind::Combined: return "#9467bd";
  }
  return "#000000";
}

int cmd_cohort(const CohortOptions& opt) {
  static const std::map<std::string, Task> task_map = {
      {"ad_cn", Task::AD_vs_CN}, {"ad_mci", Task::AD_vs_MCI}, {"mci_cn", Task::MCI_vs_CN}};
  static const std::map<std::string, FeatureKind> kind_map = {
      {"global", FeatureKind::GlobalWMH},
      {"regional", FeatureKind::RegionalWMH},
      {"brain", FeatureKind::BrainVolumes},
      {"combined", FeatureKind::Combined}};

  std::vector<Task> tasks;
  if (opt.task == "all") {
    tasks = {Task::AD_vs_CN, Task::AD_vs_MCI, Task::MCI_vs_CN};
  } else {
    tasks = {task_map.at(opt.task)};
  }
  std::vector<FeatureKind> kinds;
  if (opt.features == "all") {
    kinds = {FeatureKind::GlobalWMH, FeatureKind::RegionalWMH, FeatureKind::BrainVolumes,
             FeatureKind::Combined};
  } else {
    kinds = {kind_map.at(opt.features)};
  }

  const CohortTable cohort = join_cohort(opt.report, opt.manifest);
  fs::create_directories(opt.out_dir);

  for (Task task : tasks) {
    SvgPlot plot(std::string("ROC ") + task_name(task), "false positive rate",
                 "true positive rate");
    plot.set_x_range(0.0, 1.0);
    plot.set_y_range(0.0, 1.0);
    plot.add_polyline({0.0, 1.0}, {0.0, 1.0}, "#999999");

    for (FeatureKind kind : kinds) {
      const TaskReport report = evaluate_task(cohort, task, kind, opt.folds, opt.seed);
      const std::string stem =
          std::string(task_name(task)) + "_" + feature_kind_name(kind);

      std::ofstream json_os(fs::path(opt.out_dir) / ("report_" + stem + ".json"));
      if (!json_os) throw IoError("cannot write task report for " + stem);
      json_os << task_report_json(report);

      std::ofstream roc_os(fs::path(opt.out_dir) / ("roc_" + stem + ".csv"));
      if (!roc_os) throw IoError("cannot write ROC CSV for " + stem);
      write_roc_csv(roc_os, report.pooled_curve);

      char label[96];
      std::snprintf(label, sizeof(label), "%s AUC=%.3f", feature_kind_name(kind),
                    report.pooled_auc);
      plot.add_polyline(report.pooled_curve.fpr, report.pooled_curve.tpr, kind_color(kind),
                        label);
      std::printf("%s %s pooled_auc %.4f\n", task_name(task), feature_kind_name(kind),
                  report.pooled_auc);
    }
    plot.write((fs::path(opt.out_dir) / (std::string("roc_") + task_name(task) + ".svg")).string());
  }
  return 0;
}

// ------------------------------------------------------------ bland-altman

struct BlandAltmanOptions {
  std::string report;
  std::string manifest;
  std::string out_csv;
  std::string out_svg;
};

int cmd_bland_altman(const BlandAltmanOptions& opt) {
  const CohortTable cohort = join_cohort(opt.report, opt.manifest);

  std::vector<const CohortRow*> with_reference;
  for (const CohortRow& row : cohort.rows) {
    if (row.reference_wmh) with_reference.push_back(&row);
  }
  if (with_reference.size() < 2) {
    throw InputError("need reference_wmh_mm3 for at least 2 subjects");
  }

  std::vector<double> pred;
  std::vector<double> ref;
  for (const CohortRow* row : with_reference) {
    pred.push_back(row->global_wmh);
    ref.push_back(*row->reference_wmh);
  }
  const BlandAltman ba = bland_altman(pred, ref);

  std::ofstream csv(opt.out_csv);
  if (!csv) throw IoError("cannot open for writing: " + opt.out_csv);
  csv << "subject_id,diagnosis,mean_mm3,diff_mm3,bias,sd_diff,loa_low,loa_high,"
         "fraction_within_loa\n";
  char buf[256];
  for (std::size_t i = 0; i < with_reference.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                  with_reference[i]->subject_id.c_str(),
                  diagnosis_name(with_reference[i]->diagnosis), (pred[i] + ref[i]) / 2.0,
                  pred[i] - ref[i], ba.bias, ba.sd_diff, ba.loa_low, ba.loa_high,
                  ba.fraction_within_loa);
    csv << buf;
  }
  if (!csv.good()) throw IoError("failed writing: " + opt.out_csv);

  SvgPlot plot("Agreement of predicted and reference lesion volume",
               "mean of predicted and reference (mm^3)", "predicted - reference (mm^3)");
  for (Diagnosis d : {Diagnosis::CN, Diagnosis::MCI, Diagnosis::AD}) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < with_reference.size(); ++i) {
      if (with_reference[i]->diagnosis != d) continue;
      xs.push_back((pred[i] + ref[i]) / 2.0);
      ys.push_back(pred[i] - ref[i]);
    }
    const char* color = d == Diagnosis::CN ? kColorCN : d == Diagnosis::MCI ? kColorMCI : kColorAD;
    if (!xs.empty()) plot.add_points(std::move(xs), std::move(ys), color, diagnosis_name(d));
  }
  char label[64];
  std::snprintf(label, sizeof(label), "bias %.6g", ba.bias);
  plot.add_hline(ba.bias, "#444444", false, label);
  std::snprintf(label, sizeof(label), "95%% limits %.6g / %.6g", ba.loa_low, ba.loa_high);
  plot.add_hline(ba.loa_low, "#444444", true, label);
  plot.add_hline(ba.loa_high, "#444444", true);
  plot.write(opt.out_svg);

  std::printf("bias %.6g sd %.6g n %zu -> %s\n", ba.bias, ba.sd_diff, ba.n, opt.out_csv.c_str());
  return 0;
}

// -------------------------------------------------------------------- hist

struct HistOptions {
  std::vector<std::string> reports;
  double bin_width = 0.0;
  std::string out_svg;
  std::string out_csv;
};

int cmd_hist(const HistOptions& opt) {
  if (!(opt.bin_width > 0.0)) throw ParameterError("--bin-width must be positive");

  static const std::array<const char*, 6> palette = {"#1f77b4", "#d62728", "#2ca02c",
                                                     "#9467bd", "#ff7f0e", "#8c564b"};

  SvgPlot plot("Lesion load distribution", "global lesion volume (mm^3)", "subjects");
  std::ostringstream csv;
  csv << "series,bin_lo,bin_hi,count\n";

  for (std::size_t s = 0; s < opt.reports.size(); ++s) {
    const std::vector<RegionReport> reports = read_region_report_csv(opt.reports[s]);
    if (reports.empty()) throw InputError("report has no subjects: " + opt.reports[s]);
    std::vector<double> values;
    values.reserve(reports.size());
    for (const RegionReport& r : reports) values.push_back(r.global_mm3);

    const LoadHistogram hist = load_histogram(values, opt.bin_width);
    const std::string series = fs::path(opt.reports[s]).filename().string();

    char buf[160];
    std::vector<double> xs;
    std::vector<double> ys;
    xs.push_back(hist.edges.front());
    ys.push_back(0.0);
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
      std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%lld\n", series.c_str(), hist.edges[b],
                    hist.edges[b + 1], hist.counts[b]);
      csv << buf;
      // Staircase outline of the bin counts.
      xs.push_back(hist.edges[b]);
      ys.push_back(static_cast<double>(hist.counts[b]));
      xs.push_back(hist.edges[b + 1]);
      ys.push_back(static_cast<double>(hist.counts[b]));
    }
    xs.push_back(hist.edges.back());
    ys.push_back(0.0);
    plot.add_polyline(std::move(xs), std::move(ys), palette[s % palette.size()], series);
  }

  if (!opt.out_csv.empty()) {
    std::ofstream os(opt.out_csv);
    if (!os) throw IoError("cannot open for writing: " + opt.out_csv);
    os << csv.str();
    if (!os.good()) throw IoError("failed writing: " + opt.out_csv);
  }
  plot.write(opt.out_svg);
  return 0;
}

// ------------------------------------------------------------------- synth

struct SynthOptions {
  std::string spec_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthOptions& opt) {
  CohortSpec spec;
  if (opt.spec_path.empty()) {
    spec = default_cohort_spec();
  } else {
    std::ifstream is(opt.spec_path);
    if (!is) throw IoError("cannot open cohort spec: " + opt.spec_path);
    std::ostringstream text;
    text << is.rdbuf();
    spec = cohort_spec_from_json(text.str());
  }
  // --seed beats REGIONWISE_SEED beats the spec file.
  if (const auto env_seed = seed_from_environment()) spec.seed = *env_seed;
  if (opt.seed) spec.seed = *opt.seed;

  const CohortTable cohort = make_cohort(spec, opt.out_dir);

  std::ofstream spec_os(fs::path(opt.out_dir) / "cohort_spec.json");
  if (!spec_os) throw IoError("cannot write cohort spec copy under " + opt.out_dir);
  spec_os << cohort_spec_to_json(spec);

  std::printf("wrote %zu subjects to %s\n", cohort.rows.size(), opt.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"White-matter lesion quantification and cohort analysis"};
  app.require_subcommand(1);

  int rc = 0;

  RegisterOptions reg;
  auto* reg_cmd = app.add_subcommand("register", "Affine-register a moving volume to a fixed one");
  reg_cmd->add_option("--moving", reg.moving, "Moving NIfTI volume")->required();
  reg_cmd->add_option("--fixed", reg.fixed, "Fixed NIfTI volume")->required();
  reg_cmd->add_option("--out-transform", reg.out_transform, "Output transform text file")
      ->required();
  reg_cmd->add_option("--levels", reg.levels, "Pyramid levels");
  reg_cmd->add_option("--max-iters", reg.max_iters, "Iteration cap per level");
  reg_cmd->callback([&] { rc = cmd_register(reg); });

  QuantifyOptions quant;
  auto* quant_cmd =
      app.add_subcommand("quantify", "Quantify lesion load per subject from a manifest");
  quant_cmd->add_option("--manifest", quant.manifest, "Cohort manifest CSV")->required();
  quant_cmd->add_option("--out-report", quant.out_report, "Output region report CSV")->required();
  quant_cmd->add_option("--threshold", quant.threshold, "Lesion probability threshold");
  quant_cmd->add_option("--jobs", quant.jobs, "Worker threads (default: processor count)");
  quant_cmd->add_flag("--keep-going", quant.keep_going,
                      "Process every subject even if some fail");
  quant_cmd->callback([&] { rc = cmd_quantify(quant); });

  CohortOptions cohort;
  auto* cohort_cmd = app.add_subcommand("cohort", "Cross-validated classification analysis");
  cohort_cmd->add_option("--report", cohort.report, "Region report CSV")->required();
  cohort_cmd->add_option("--manifest", cohort.manifest, "Cohort manifest CSV")->required();
  cohort_cmd->add_option("--task", cohort.task, "all, ad_cn, ad_mci, or mci_cn")
      ->check(CLI::IsMember({"all", "ad_cn", "ad_mci", "mci_cn"}));
  cohort_cmd->add_option("--features", cohort.features,
                         "all, global, regional, brain, or combined")
      ->check(CLI::IsMember({"all", "global", "regional", "brain", "combined"}));
  cohort_cmd->add_option("--folds", cohort.folds, "Cross-validation folds");
  auto* cohort_seed = cohort_cmd->add_option("--seed", cohort.seed, "Fold-shuffle seed");
  cohort_cmd->add_option("--out-dir", cohort.out_dir, "Output directory")->required();
  cohort_cmd->callback([&] {
    if (!cohort_seed->count()) {
      if (const auto s = seed_from_environment()) cohort.seed = *s;
    }
    rc = cmd_cohort(cohort);
  });

  BlandAltmanOptions ba;
  auto* ba_cmd =
      app.add_subcommand("bland-altman", "Agreement between predicted and reference volumes");
  ba_cmd->add_option("--report", ba.report, "Region report CSV")->required();
  ba_cmd->add_option("--manifest", ba.manifest, "Cohort manifest CSV")->required();
  ba_cmd->add_option("--out-csv", ba.out_csv, "Output per-subject CSV")->required();
  ba_cmd->add_option("--out-svg", ba.out_svg, "Output scatter SVG")->required();
  ba_cmd->callback([&] { rc = cmd_bland_altman(ba); });

  HistOptions hist;
  auto* hist_cmd = app.add_subcommand("hist", "Lesion load histograms across reports");
  hist_cmd->add_option("--report", hist.reports, "Region report CSV (repeatable)")->required();
  hist_cmd->add_option("--bin-width", hist.bin_width, "Bin width in mm^3")->required();
  hist_cmd->add_option("--out-svg", hist.out_svg, "Output SVG")->required();
  hist_cmd->add_option("--out-csv", hist.out_csv, "Optional bin-count CSV");
  hist_cmd->callback([&] { rc = cmd_hist(hist); });

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth_cmd->add_option("--spec", synth.spec_path, "Cohort spec JSON (default: built-in)");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  std::uint64_t synth_seed_value = 0;
  auto* synth_seed = synth_cmd->add_option("--seed", synth_seed_value, "Generator seed");
  synth_cmd->callback([&] {
    if (synth_seed->count()) synth.seed = synth_seed_value;
    rc = cmd_synth(synth);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return rc;
}
