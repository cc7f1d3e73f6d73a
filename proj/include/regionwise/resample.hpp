#pragma once

#include "regionwise/affine.hpp"
#include "regionwise/volume.hpp"

namespace regionwise {

enum class Interp { linear, nearest };

// Pulls src through t onto the target grid: each target voxel index i maps
// to world point target.affine * i, back through invert(t) into src world
// space, and into continuous src voxel coordinates. Points outside the src
// grid produce 0. Nearest mode rounds half-up per axis; linear mode is
// trilinear and is rejected for mask/label sources.
Volume resample(const Volume& src, const AffineTransform& t, const VolumeGeometry& target,
                Interp mode);

// Nearest-neighbour resampling of an atlas parcellation into subject space.
// The output label set is contained in the input set plus {0}.
LabelVolume propagate_atlas(const LabelVolume& atlas_labels, const AffineTransform& t,
                            const VolumeGeometry& subject_geometry);

}  // namespace regionwise
