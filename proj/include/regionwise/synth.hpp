#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "regionwise/stats.hpp"
#include "regionwise/volume.hpp"

namespace regionwise {

// Per-class (CN, MCI, AD) mean lesion-voxel count for one atlas region.
// Effect regions replace the class-independent background rate.
struct EffectRegion {
  int region = 0;
  std::array<double, 3> mean_voxels{};
};

struct BrainVolumeEffect {
  std::array<double, 3> mean{};  // CN, MCI, AD
  double sd = 0.0;
};

struct CohortSpec {
  std::array<int, 3> n_per_class{0, 0, 0};  // CN, MCI, AD
  std::array<int, 3> dims{32, 32, 32};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::vector<EffectRegion> effect_regions;
  double background_rate = 0.0;
  // hippocampus, CSF, white matter, gray matter
  std::array<BrainVolumeEffect, 4> brain_volume_effects{};
  double reference_noise_sd = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

CohortSpec default_cohort_spec();
CohortSpec cohort_spec_from_json(const std::string& text);
std::string cohort_spec_to_json(const CohortSpec& spec);

// Smooth seeded test image: a centred ellipsoid with radially decreasing
// intensity plus a few low-frequency cosine ripples. Values lie in [0,1].
Volume make_phantom(const std::array<int, 3>& dims, const std::array<double, 3>& spacing,
                    std::uint64_t seed);

// Deterministic 34-block partition of the interior ellipsoid: three z slabs
// carrying 3x3, 4x4 and 3x3 xy grids. Label 0 outside the ellipsoid.
LabelVolume make_parcellation(const std::array<int, 3>& dims,
                              const std::array<double, 3>& spacing);

// Poisson lesion counts per region, placed uniformly without replacement
// (capped at region size). placed_counts, when given, receives the exact
// number of voxels planted per region.
Volume plant_lesions(const LabelVolume& regions, const std::array<double, kNumRegions>& means,
                     std::uint64_t seed, std::array<long long, kNumRegions>* placed_counts = nullptr);

// Cohort rows only, nothing written to disk. Subjects are ordered CN block,
// MCI block, AD block; each subject draws from an independent sub-seed.
CohortTable make_cohort_table(const CohortSpec& spec);

// Same rows as make_cohort_table, plus artifacts under out_dir: the shared
// atlas, one lesion probability map per subject, manifest.csv with paths
// relative to the manifest, and ground_truth.json with planted counts.
CohortTable make_cohort(const CohortSpec& spec, const std::string& out_dir);

}  // namespace regionwise
