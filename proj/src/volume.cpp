#include "regionwise/volume.hpp"

#include <cmath>
#include <sstream>

namespace regionwise {

const char* intent_name(Intent intent) {
  switch (intent) {
    case Intent::intensity: return "intensity";
    case Intent::probability: return "probability";
    case Intent::mask: return "mask";
    case Intent::labels: return "labels";
  }
  return "unknown";
}

void Volume::validate() const {
  for (int axis = 0; axis < 3; ++axis) {
    if (dims[static_cast<std::size_t>(axis)] < 1) {
      throw InputError("volume dims must be >= 1 on every axis");
    }
    if (!(spacing[static_cast<std::size_t>(axis)] > 0.0)) {
      throw InputError("volume spacing must be positive on every axis");
    }
  }
  if (data.size() != voxel_count()) {
    std::ostringstream msg;
    msg << "data length " << data.size() << " does not match dims product " << voxel_count();
    throw InputError(msg.str());
  }
  switch (intent) {
    case Intent::intensity:
      break;
    case Intent::probability:
      for (double v : data) {
        if (!(v >= 0.0 && v <= 1.0)) {
          throw InputError("probability volume has a value outside [0, 1]");
        }
      }
      break;
    case Intent::mask:
      for (double v : data) {
        if (v != 0.0 && v != 1.0) {
          throw InputError("mask volume has a value outside {0, 1}");
        }
      }
      break;
    case Intent::labels:
      for (double v : data) {
        if (!(v >= 0.0) || v != std::floor(v)) {
          throw InputError("label volume has a negative or non-integer value");
        }
      }
      break;
  }
}

bool validate_geometry(const VolumeGeometry& a, const VolumeGeometry& b, double tol) {
  if (a.dims != b.dims) return false;
  for (std::size_t axis = 0; axis < 3; ++axis) {
    if (std::abs(a.spacing[axis] - b.spacing[axis]) > tol) return false;
  }
  for (std::size_t i = 0; i < 16; ++i) {
    if (std::abs(a.affine.m[i] - b.affine.m[i]) > tol) return false;
  }
  return true;
}

bool validate_geometry(const Volume& a, const Volume& b, double tol) {
  return validate_geometry(a.geometry(), b.geometry(), tol);
}

LabelVolume::LabelVolume(Volume v, int max_region) : vol(std::move(v)), num_regions(max_region) {
  if (vol.intent != Intent::labels) {
    throw InputError("LabelVolume requires a volume with labels intent");
  }
  vol.validate();
  for (double value : vol.data) {
    const int label = static_cast<int>(value);
    if (label < 0 || label > num_regions) {
      std::ostringstream msg;
      msg << "label " << label << " outside [0, " << num_regions << "]";
      throw LabelError(msg.str());
    }
    if (label > 0) region_ids.insert(label);
  }
}

ProbabilityStack::ProbabilityStack(std::vector<Volume> ch, std::vector<std::string> names)
    : channels(std::move(ch)), class_names(std::move(names)) {
  if (channels.empty()) throw InputError("probability stack needs at least one channel");
  if (class_names.size() != channels.size()) {
    throw InputError("probability stack class_names/channels size mismatch");
  }
  for (const Volume& c : channels) {
    if (c.intent != Intent::probability) {
      throw InputError("probability stack channels must have probability intent");
    }
    c.validate();
    if (!validate_geometry(channels.front(), c)) {
      throw GeometryError("probability stack channels have mismatched geometry");
    }
  }
  const std::size_t n = channels.front().voxel_count();
  for (std::size_t v = 0; v < n; ++v) {
    double sum = 0.0;
    for (const Volume& c : channels) sum += c.data[v];
    if (sum < 1.0 - 1e-4 || sum > 1.0 + 1e-4) {
      std::ostringstream msg;
      msg << "per-voxel channel sum " << sum << " outside [1-1e-4, 1+1e-4] at voxel " << v;
      throw InputError(msg.str());
    }
  }
}

}  // namespace regionwise
