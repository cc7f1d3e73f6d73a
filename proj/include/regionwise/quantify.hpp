#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "regionwise/volume.hpp"

namespace regionwise {

inline constexpr int kNumRegions = 34;

// Lesion volume broken down over the 34-region atlas. Volumes are in mm^3.
// global_mm3 is accumulated as sum(per_region_mm3) + outside_mm3 in region
// order, so the conservation identity holds bit-for-bit.
struct RegionReport {
  std::string subject_id;
  std::array<double, kNumRegions> per_region_mm3{};
  double outside_mm3 = 0.0;  // lesion voxels at atlas label 0
  double global_mm3 = 0.0;
  double voxel_volume_mm3 = 0.0;
  std::array<long long, kNumRegions> per_region_voxels{};
};

struct FusionResult {
  LabelVolume label_map;  // per-voxel argmax class
  ProbabilityStack fused_probs;
};

// Average the two stacks channel-wise, then argmax. Ties go to the lowest
// class index.
FusionResult fuse_probability_maps(const ProbabilityStack& flair, const ProbabilityStack& t1);

// mask voxel = 1 iff prob >= threshold. threshold must lie in (0,1).
Volume binarize_lesions(const Volume& prob, double threshold = 0.5);

// Count mask voxels per atlas region and convert to mm^3 using the spacing
// of spacing_source. subject_id is carried through to the report.
RegionReport regional_lesion_load(const Volume& mask, const LabelVolume& regions,
                                  const Volume& spacing_source,
                                  const std::string& subject_id = "");

// 2 * |A intersect B| / (|A| + |B|); both masks empty gives 1.0.
double dice_coefficient(const Volume& a, const Volume& b);

// Left-closed right-open bins of uniform width starting at 0.
struct LoadHistogram {
  double bin_width = 0.0;
  std::vector<double> edges;      // counts.size() + 1 entries; empty when no values
  std::vector<long long> counts;

  long long total() const;
};

LoadHistogram load_histogram(const std::vector<double>& values, double bin_width);

// One CSV row per report: subject_id, global, outside, then the 34 regional
// volumes, 6 significant digits. Header row is mandatory.
void write_region_report_csv(std::ostream& os, const std::vector<RegionReport>& reports);
void write_region_report_csv(const std::string& path, const std::vector<RegionReport>& reports);

// Reads rows written by write_region_report_csv. Voxel counts and voxel
// volume are not stored in the CSV, so those fields come back zeroed.
std::vector<RegionReport> read_region_report_csv(const std::string& path);

}  // namespace regionwise
