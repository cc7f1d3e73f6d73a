#include "regionwise/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "regionwise/errors.hpp"

namespace regionwise {

const char* const kManifestHeader =
    "subject_id,diagnosis,lesion_prob_flair_path,lesion_prob_t1_path,atlas_labels_path,"
    "affine_path,hippocampus_mm3,csf_mm3,wm_mm3,gm_mm3,reference_wmh_mm3";

namespace {

constexpr std::size_t kManifestFields = 11;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_volume(const std::string& field, const std::string& subject,
                    const char* column) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(field, &consumed);
    if (consumed != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw InputError(std::string("non-numeric ") + column + " for subject " + subject);
  }
}

std::string format_volume(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<ManifestRow> read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);

  std::string line;
  if (!std::getline(is, line)) throw InputError("manifest is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) throw InputError("unexpected manifest header in " + path);

  std::vector<ManifestRow> rows;
  std::set<std::string> seen;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != kManifestFields) {
      throw InputError("manifest row has " + std::to_string(fields.size()) +
                       " fields, expected 11: " + line);
    }

    ManifestRow row;
    row.subject_id = fields[0];
    if (row.subject_id.empty()) throw InputError("manifest row with empty subject_id");
    if (!seen.insert(row.subject_id).second) {
      throw InputError("duplicate subject id in manifest: " + row.subject_id);
    }
    row.diagnosis = diagnosis_from_string(fields[1]);
    row.lesion_prob_flair_path = fields[2];
    if (row.lesion_prob_flair_path.empty()) {
      throw InputError("missing lesion probability path for " + row.subject_id);
    }
    row.lesion_prob_t1_path = fields[3];
    row.atlas_labels_path = fields[4];
    if (row.atlas_labels_path.empty()) {
      throw InputError("missing atlas path for " + row.subject_id);
    }
    row.affine_path = fields[5];

    const bool any_brain = !fields[6].empty() || !fields[7].empty() || !fields[8].empty() ||
                           !fields[9].empty();
    const bool all_brain = !fields[6].empty() && !fields[7].empty() && !fields[8].empty() &&
                           !fields[9].empty();
    if (any_brain && !all_brain) {
      throw InputError("brain volumes must be given together for subject " + row.subject_id);
    }
    if (all_brain) {
      row.brain_volumes_mm3 = {
          parse_volume(fields[6], row.subject_id, "hippocampus_mm3"),
          parse_volume(fields[7], row.subject_id, "csf_mm3"),
          parse_volume(fields[8], row.subject_id, "wm_mm3"),
          parse_volume(fields[9], row.subject_id, "gm_mm3"),
      };
    }
    if (!fields[10].empty()) {
      row.reference_wmh_mm3 = parse_volume(fields[10], row.subject_id, "reference_wmh_mm3");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open manifest for writing: " + path);
  os << kManifestHeader << "\n";
  for (const ManifestRow& row : rows) {
    os << row.subject_id << ',' << diagnosis_name(row.diagnosis) << ','
       << row.lesion_prob_flair_path << ',' << row.lesion_prob_t1_path << ','
       << row.atlas_labels_path << ',' << row.affine_path << ',';
    if (row.brain_volumes_mm3) {
      const auto& b = *row.brain_volumes_mm3;
      os << format_volume(b[0]) << ',' << format_volume(b[1]) << ',' << format_volume(b[2])
         << ',' << format_volume(b[3]);
    } else {
      os << ",,,";
    }
    os << ',';
    if (row.reference_wmh_mm3) os << format_volume(*row.reference_wmh_mm3);
    os << "\n";
  }
  if (!os.good()) throw IoError("failed writing manifest: " + path);
}

std::string resolve_manifest_path(const std::string& manifest_path, const std::string& entry) {
  if (entry.empty()) return entry;
  const std::filesystem::path p(entry);
  if (p.is_absolute()) return entry;
  return (std::filesystem::path(manifest_path).parent_path() / p).string();
}

}  // namespace regionwise
