#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "regionwise/mat4.hpp"

namespace regionwise {

enum class Intent { intensity, probability, mask, labels };

const char* intent_name(Intent intent);

// Grid shape shared by co-registered volumes: dims, voxel spacing in mm,
// and the voxel-index -> world-mm affine.
struct VolumeGeometry {
  std::array<int, 3> dims{0, 0, 0};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  Mat4 affine;
};

// 3D scalar grid. Data is stored x-fastest (index = i + nx*(j + ny*k)) in
// double precision regardless of the on-disk datatype. Volumes are treated
// as immutable once filled; sharing across threads read-only is safe.
struct Volume {
  std::array<int, 3> dims{0, 0, 0};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  Mat4 affine;  // voxel index -> world mm
  std::vector<double> data;
  Intent intent = Intent::intensity;

  Volume() = default;
  Volume(std::array<int, 3> d, std::array<double, 3> s, const Mat4& a, Intent in)
      : dims(d), spacing(s), affine(a), intent(in) {
    data.assign(voxel_count(), 0.0);
  }

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
  }

  double at(int i, int j, int k) const { return data[index(i, j, k)]; }
  double& at(int i, int j, int k) { return data[index(i, j, k)]; }

  double voxel_volume_mm3() const { return spacing[0] * spacing[1] * spacing[2]; }

  VolumeGeometry geometry() const { return VolumeGeometry{dims, spacing, affine}; }

  // Throws InputError when the dims/spacing/data/intent invariants are
  // violated.
  void validate() const;
};

// True iff dims match exactly and every spacing and affine entry differs by
// at most tol.
bool validate_geometry(const Volume& a, const Volume& b, double tol = 1e-3);
bool validate_geometry(const VolumeGeometry& a, const VolumeGeometry& b, double tol = 1e-3);

// Integer-labelled parcellation. Label 0 means "outside all regions";
// labels 1..num_regions are atlas regions.
struct LabelVolume {
  Volume vol;
  std::set<int> region_ids;  // nonzero labels present
  int num_regions = 34;

  LabelVolume() = default;
  // Validates the label range and collects the set of labels present.
  explicit LabelVolume(Volume v, int max_region = 34);
};

// Per-class probability channels over a shared grid. Construction rejects
// geometry mismatches and per-voxel channel sums outside [1-1e-4, 1+1e-4].
struct ProbabilityStack {
  std::vector<Volume> channels;
  std::vector<std::string> class_names;

  ProbabilityStack() = default;
  ProbabilityStack(std::vector<Volume> ch, std::vector<std::string> names);

  std::size_t num_classes() const { return channels.size(); }
};

}  // namespace regionwise
