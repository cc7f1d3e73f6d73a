#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regionwise/stats.hpp"

namespace regionwise {

// One cohort-manifest CSV row. Empty path fields mean "absent": a missing
// t1 map falls back to single-modality fusion, a missing affine means the
// atlas is already in subject space. The four brain volumes travel as a
// group: all present or all absent.
struct ManifestRow {
  std::string subject_id;
  Diagnosis diagnosis = Diagnosis::CN;
  std::string lesion_prob_flair_path;
  std::string lesion_prob_t1_path;
  std::string atlas_labels_path;
  std::string affine_path;
  std::optional<std::array<double, 4>> brain_volumes_mm3;  // hippocampus, csf, wm, gm
  std::optional<double> reference_wmh_mm3;
};

extern const char* const kManifestHeader;

// Rejects a bad header, wrong field counts, duplicate subject ids, partial
// brain-volume groups, and non-numeric volumes. Does not check that the
// referenced files exist; that happens when they are opened.
std::vector<ManifestRow> read_manifest(const std::string& path);

void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows);

// Manifest path entries are interpreted relative to the manifest's own
// directory; absolute entries pass through untouched.
std::string resolve_manifest_path(const std::string& manifest_path, const std::string& entry);

}  // namespace regionwise
