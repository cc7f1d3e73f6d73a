#pragma once

#include <filesystem>

#include "regionwise/volume.hpp"

namespace regionwise {

// On-disk datatype codes from the NIfTI-1 standard.
enum class NiftiDatatype : short {
  automatic = 0,  // pick from the volume intent (write only)
  uint8 = 2,
  int16 = 4,
  float32 = 16,
  float64 = 64,
};

// Reads a NIfTI-1 single file (.nii or .nii.gz). Values are scaled by
// scl_slope/scl_inter when scl_slope != 0 and stored as doubles. The affine
// is taken from sform when sform_code > 0, else qform when qform_code > 0,
// else a spacing diagonal.
Volume read_nifti(const std::filesystem::path& path, Intent intent = Intent::intensity);

// Writes v as a NIfTI-1 single file (gzip when the name ends in .gz), with
// sform_code = 1 carrying v.affine. The default datatype follows the
// intent: float32 for intensity/probability, uint8 for mask, int16 for
// labels; pass an explicit datatype to override.
void write_nifti(const Volume& v, const std::filesystem::path& path,
                 NiftiDatatype datatype = NiftiDatatype::automatic);

}  // namespace regionwise
