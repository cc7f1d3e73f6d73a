#include "regionwise/quantify.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "regionwise/errors.hpp"

namespace regionwise {

FusionResult fuse_probability_maps(const ProbabilityStack& flair, const ProbabilityStack& t1) {
  if (flair.class_names != t1.class_names) {
    throw InputError("probability stacks have different class lists");
  }
  if (flair.num_classes() == 0) throw InputError("probability stacks are empty");
  for (std::size_t c = 0; c < flair.num_classes(); ++c) {
    if (!validate_geometry(flair.channels[c], t1.channels[c])) {
      throw GeometryError("probability stacks are on different grids");
    }
  }

  const std::size_t num_classes = flair.num_classes();
  const std::size_t n = flair.channels[0].voxel_count();

  std::vector<Volume> fused;
  fused.reserve(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    Volume out = flair.channels[c];
    for (std::size_t v = 0; v < n; ++v) {
      out.data[v] = (flair.channels[c].data[v] + t1.channels[c].data[v]) / 2.0;
    }
    fused.push_back(std::move(out));
  }

  Volume labels(flair.channels[0].dims, flair.channels[0].spacing, flair.channels[0].affine,
                Intent::labels);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < num_classes; ++c) {
      if (fused[c].data[v] > fused[best].data[v]) best = c;
    }
    labels.data[v] = static_cast<double>(best);
  }

  FusionResult result;
  result.fused_probs = ProbabilityStack(std::move(fused), flair.class_names);
  result.label_map = LabelVolume(std::move(labels), static_cast<int>(num_classes) - 1);
  return result;
}

Volume binarize_lesions(const Volume& prob, double threshold) {
  if (prob.intent != Intent::probability) {
    throw InputError("binarize_lesions expects a probability volume");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ParameterError("binarization threshold must lie in (0,1)");
  }
  Volume mask(prob.dims, prob.spacing, prob.affine, Intent::mask);
  for (std::size_t v = 0; v < prob.voxel_count(); ++v) {
    mask.data[v] = prob.data[v] >= threshold ? 1.0 : 0.0;
  }
  return mask;
}

RegionReport regional_lesion_load(const Volume& mask, const LabelVolume& regions,
                                  const Volume& spacing_source, const std::string& subject_id) {
  if (mask.intent != Intent::mask) throw InputError("regional_lesion_load expects a mask");
  if (!validate_geometry(mask, regions.vol)) {
    throw GeometryError("mask and atlas are on different grids");
  }
  if (!regions.region_ids.empty() && *regions.region_ids.rbegin() > kNumRegions) {
    throw LabelError("atlas label exceeds " + std::to_string(kNumRegions));
  }

  RegionReport report;
  report.subject_id = subject_id;
  report.voxel_volume_mm3 = spacing_source.voxel_volume_mm3();

  long long outside_voxels = 0;
  for (std::size_t v = 0; v < mask.voxel_count(); ++v) {
    if (mask.data[v] == 0.0) continue;
    const int label = static_cast<int>(regions.vol.data[v]);
    if (label == 0) {
      ++outside_voxels;
    } else {
      ++report.per_region_voxels[static_cast<std::size_t>(label - 1)];
    }
  }

  report.outside_mm3 = static_cast<double>(outside_voxels) * report.voxel_volume_mm3;
  double total = 0.0;
  for (int r = 0; r < kNumRegions; ++r) {
    report.per_region_mm3[static_cast<std::size_t>(r)] =
        static_cast<double>(report.per_region_voxels[static_cast<std::size_t>(r)]) *
        report.voxel_volume_mm3;
    total += report.per_region_mm3[static_cast<std::size_t>(r)];
  }
  report.global_mm3 = total + report.outside_mm3;
  return report;
}

double dice_coefficient(const Volume& a, const Volume& b) {
  if (a.intent != Intent::mask || b.intent != Intent::mask) {
    throw InputError("dice_coefficient expects mask volumes");
  }
  if (!validate_geometry(a, b)) throw GeometryError("masks are on different grids");

  long long size_a = 0;
  long long size_b = 0;
  long long overlap = 0;
  for (std::size_t v = 0; v < a.voxel_count(); ++v) {
    const bool in_a = a.data[v] != 0.0;
    const bool in_b = b.data[v] != 0.0;
    size_a += in_a;
    size_b += in_b;
    overlap += in_a && in_b;
  }
  if (size_a + size_b == 0) return 1.0;
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(size_a + size_b);
}

long long LoadHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

LoadHistogram load_histogram(const std::vector<double>& values, double bin_width) {
  if (!(bin_width > 0.0)) throw ParameterError("histogram bin width must be positive");
  LoadHistogram hist;
  hist.bin_width = bin_width;
  if (values.empty()) return hist;

  for (double v : values) {
    if (v < 0.0 || !std::isfinite(v)) throw InputError("histogram values must be non-negative");
  }
  double max_value = values[0];
  for (double v : values) max_value = std::max(max_value, v);

  const std::size_t num_bins = static_cast<std::size_t>(std::floor(max_value / bin_width)) + 1;
  hist.counts.assign(num_bins, 0);
  for (double v : values) {
    std::size_t bin = static_cast<std::size_t>(std::floor(v / bin_width));
    if (bin >= num_bins) bin = num_bins - 1;  // guards max_value/bin_width landing on an edge
    ++hist.counts[bin];
  }
  hist.edges.resize(num_bins + 1);
  for (std::size_t e = 0; e <= num_bins; ++e) hist.edges[e] = static_cast<double>(e) * bin_width;
  return hist;
}

namespace {

std::string format_volume(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_region_report_csv(std::ostream& os, const std::vector<RegionReport>& reports) {
  os << "subject_id,global_mm3,outside_mm3";
  for (int r = 1; r <= kNumRegions; ++r) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), ",region_%02d_mm3", r);
    os << buf;
  }
  os << "\n";
  for (const RegionReport& rep : reports) {
    os << rep.subject_id << ',' << format_volume(rep.global_mm3) << ','
       << format_volume(rep.outside_mm3);
    for (double v : rep.per_region_mm3) os << ',' << format_volume(v);
    os << "\n";
  }
}

void write_region_report_csv(const std::string& path, const std::vector<RegionReport>& reports) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_region_report_csv(os, reports);
  if (!os.good()) throw IoError("failed writing: " + path);
}

std::vector<RegionReport> read_region_report_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);

  std::string line;
  if (!std::getline(is, line)) throw InputError("region report is empty: " + path);
  if (line.rfind("subject_id,global_mm3,outside_mm3", 0) != 0) {
    throw InputError("unexpected region report header in " + path);
  }

  std::vector<RegionReport> reports;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != static_cast<std::size_t>(kNumRegions) + 3) {
      throw InputError("malformed region report row in " + path);
    }
    RegionReport rep;
    rep.subject_id = fields[0];
    try {
      rep.global_mm3 = std::stod(fields[1]);
      rep.outside_mm3 = std::stod(fields[2]);
      for (int r = 0; r < kNumRegions; ++r) {
        rep.per_region_mm3[static_cast<std::size_t>(r)] =
            std::stod(fields[static_cast<std::size_t>(r) + 3]);
      }
    } catch (const std::exception&) {
      throw InputError("non-numeric volume in region report row for " + rep.subject_id);
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace regionwise
