#include "regionwise/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "regionwise/errors.hpp"
#include "regionwise/manifest.hpp"
#include "regionwise/nifti_io.hpp"
#include "regionwise/rng.hpp"

namespace regionwise {

void CohortSpec::validate() const {
  for (int n : n_per_class) {
    if (n < 0) throw ParameterError("n_per_class entries must be >= 0");
  }
  for (int d : dims) {
    if (d < 16) throw ParameterError("cohort dims must be >= 16 per axis");
  }
  for (double s : spacing) {
    if (!(s > 0.0)) throw ParameterError("cohort spacing must be positive");
  }
  if (background_rate < 0.0) throw ParameterError("background_rate must be >= 0");
  std::array<bool, kNumRegions> seen{};
  for (const EffectRegion& e : effect_regions) {
    if (e.region < 1 || e.region > kNumRegions) {
      throw ParameterError("effect region id out of range: " + std::to_string(e.region));
    }
    if (seen[static_cast<std::size_t>(e.region - 1)]) {
      throw ParameterError("duplicate effect region: " + std::to_string(e.region));
    }
    seen[static_cast<std::size_t>(e.region - 1)] = true;
    for (double m : e.mean_voxels) {
      if (m < 0.0) throw ParameterError("effect mean voxel counts must be >= 0");
    }
  }
  for (const BrainVolumeEffect& b : brain_volume_effects) {
    for (double m : b.mean) {
      if (m < 0.0) throw ParameterError("brain volume means must be >= 0");
    }
    if (b.sd < 0.0) throw ParameterError("brain volume spread must be >= 0");
  }
  if (reference_noise_sd < 0.0) throw ParameterError("reference_noise_sd must be >= 0");
}

CohortSpec default_cohort_spec() {
  CohortSpec spec;
  spec.n_per_class = {60, 60, 60};
  spec.dims = {32, 32, 32};
  spec.spacing = {1.0, 1.0, 1.0};
  spec.background_rate = 80.0;
  spec.effect_regions = {
      EffectRegion{1, {5.0, 20.0, 40.0}},
      EffectRegion{22, {5.0, 20.0, 40.0}},
  };
  spec.brain_volume_effects = {
      BrainVolumeEffect{{4000.0, 3600.0, 3200.0}, 300.0},    // hippocampus
      BrainVolumeEffect{{300000.0, 315000.0, 330000.0}, 15000.0},  // CSF
      BrainVolumeEffect{{500000.0, 492000.0, 484000.0}, 20000.0},  // white matter
      BrainVolumeEffect{{620000.0, 605000.0, 590000.0}, 25000.0},  // gray matter
  };
  spec.reference_noise_sd = 50.0;
  spec.seed = 1234;
  return spec;
}

namespace {

const std::array<const char*, 4> kBrainKeys = {"hippocampus", "csf", "white_matter",
                                               "gray_matter"};

template <class T, std::size_t N>
std::array<T, N> array_from_json(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != N) {
    throw InputError(std::string("cohort spec field '") + key + "' must be an array of " +
                     std::to_string(N));
  }
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = j[i].get<T>();
  return out;
}

}  // namespace

CohortSpec cohort_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("cohort spec is not valid JSON: ") + e.what());
  }

  CohortSpec spec = default_cohort_spec();
  try {
    if (j.contains("n_per_class")) {
      spec.n_per_class = array_from_json<int, 3>(j["n_per_class"], "n_per_class");
    }
    if (j.contains("dims")) spec.dims = array_from_json<int, 3>(j["dims"], "dims");
    if (j.contains("spacing")) {
      spec.spacing = array_from_json<double, 3>(j["spacing"], "spacing");
    }
    if (j.contains("background_rate")) spec.background_rate = j["background_rate"].get<double>();
    if (j.contains("effect_regions")) {
      spec.effect_regions.clear();
      for (const auto& e : j["effect_regions"]) {
        EffectRegion region;
        region.region = e.at("region").get<int>();
        region.mean_voxels = array_from_json<double, 3>(e.at("mean_voxels"), "mean_voxels");
        spec.effect_regions.push_back(region);
      }
    }
    if (j.contains("brain_volume_effects")) {
      const auto& b = j["brain_volume_effects"];
      for (std::size_t i = 0; i < kBrainKeys.size(); ++i) {
        if (!b.contains(kBrainKeys[i])) continue;
        spec.brain_volume_effects[i].mean =
            array_from_json<double, 3>(b[kBrainKeys[i]].at("mean"), "mean");
        spec.brain_volume_effects[i].sd = b[kBrainKeys[i]].at("sd").get<double>();
      }
    }
    if (j.contains("reference_noise_sd")) {
      spec.reference_noise_sd = j["reference_noise_sd"].get<double>();
    }
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed cohort spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string cohort_spec_to_json(const CohortSpec& spec) {
  nlohmann::ordered_json j;
  j["n_per_class"] = spec.n_per_class;
  j["dims"] = spec.dims;
  j["spacing"] = spec.spacing;
  j["background_rate"] = spec.background_rate;
  j["effect_regions"] = nlohmann::ordered_json::array();
  for (const EffectRegion& e : spec.effect_regions) {
    j["effect_regions"].push_back({{"region", e.region}, {"mean_voxels", e.mean_voxels}});
  }
  nlohmann::ordered_json brain = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kBrainKeys.size(); ++i) {
    brain[kBrainKeys[i]] = {{"mean", spec.brain_volume_effects[i].mean},
                            {"sd", spec.brain_volume_effects[i].sd}};
  }
  j["brain_volume_effects"] = std::move(brain);
  j["reference_noise_sd"] = spec.reference_noise_sd;
  j["seed"] = spec.seed;
  return j.dump(2) + "\n";
}

namespace {

Mat4 spacing_affine(const std::array<double, 3>& spacing) {
  Mat4 m;
  m.at(0, 0) = spacing[0];
  m.at(1, 1) = spacing[1];
  m.at(2, 2) = spacing[2];
  return m;
}

void check_dims(const std::array<int, 3>& dims) {
  for (int d : dims) {
    if (d < 16) throw ParameterError("phantom dims must be >= 16 per axis");
  }
}

}  // namespace

Volume make_phantom(const std::array<int, 3>& dims, const std::array<double, 3>& spacing,
                    std::uint64_t seed) {
  check_dims(dims);
  Volume v(dims, spacing, spacing_affine(spacing), Intent::intensity);

  // A handful of low-frequency cosine ripples; amplitudes sum to 1 so the
  // perturbation stays inside [-1, 1].
  constexpr int kNumWaves = 4;
  constexpr double kTwoPi = 6.283185307179586;
  constexpr double kRippleAmplitude = 0.08;
  Lcg64 rng(seed);
  struct Wave {
    double fx, fy, fz, phase;
  };
  std::array<Wave, kNumWaves> waves{};
  for (Wave& w : waves) {
    w.fx = static_cast<double>(1 + rng.below(3));
    w.fy = static_cast<double>(1 + rng.below(3));
    w.fz = static_cast<double>(1 + rng.below(3));
    w.phase = rng.uniform(0.0, kTwoPi);
  }

  const std::array<double, 3> center{(dims[0] - 1) / 2.0, (dims[1] - 1) / 2.0,
                                     (dims[2] - 1) / 2.0};
  const std::array<double, 3> semi{0.45 * dims[0], 0.45 * dims[1], 0.45 * dims[2]};

  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        const double rx = (i - center[0]) / semi[0];
        const double ry = (j - center[1]) / semi[1];
        const double rz = (k - center[2]) / semi[2];
        const double rho_sq = rx * rx + ry * ry + rz * rz;
        const double base = std::max(0.0, 1.0 - rho_sq);
        double ripple = 0.0;
        for (const Wave& w : waves) {
          ripple += 0.25 * std::cos(kTwoPi * (w.fx * i / dims[0] + w.fy * j / dims[1] +
                                              w.fz * k / dims[2]) +
                                    w.phase);
        }
        v.at(i, j, k) = base * (1.0 + kRippleAmplitude * ripple) / (1.0 + kRippleAmplitude);
      }
    }
  }
  return v;
}

LabelVolume make_parcellation(const std::array<int, 3>& dims,
                              const std::array<double, 3>& spacing) {
  check_dims(dims);
  Volume v(dims, spacing, spacing_affine(spacing), Intent::labels);

  const std::array<double, 3> center{(dims[0] - 1) / 2.0, (dims[1] - 1) / 2.0,
                                     (dims[2] - 1) / 2.0};
  const std::array<double, 3> semi{0.45 * dims[0], 0.45 * dims[1], 0.45 * dims[2]};

  // Three z slabs split at rel_z = ±1/3 carry 3x3, 4x4 and 3x3 xy grids:
  // 9 + 16 + 9 = 34 blocks.
  const auto grid_cell = [](double rel, int g) {
    int cell = static_cast<int>(std::floor((rel + 1.0) / 2.0 * g));
    return std::clamp(cell, 0, g - 1);
  };

  for (int k = 0; k < dims[2]; ++k) {
    const double rz = (k - center[2]) / semi[2];
    for (int j = 0; j < dims[1]; ++j) {
      const double ry = (j - center[1]) / semi[1];
      for (int i = 0; i < dims[0]; ++i) {
        const double rx = (i - center[0]) / semi[0];
        if (rx * rx + ry * ry + rz * rz > 1.0) continue;
        int slab;
        int grid;
        int base;
        if (rz < -1.0 / 3.0) {
          slab = 0, grid = 3, base = 1;
        } else if (rz <= 1.0 / 3.0) {
          slab = 1, grid = 4, base = 10;
        } else {
          slab = 2, grid = 3, base = 26;
        }
        (void)slab;
        const int cell = grid_cell(ry, grid) * grid + grid_cell(rx, grid);
        v.at(i, j, k) = static_cast<double>(base + cell);
      }
    }
  }

  LabelVolume parcellation(std::move(v), kNumRegions);
  for (int r = 1; r <= kNumRegions; ++r) {
    if (parcellation.region_ids.count(r) == 0) {
      throw ParameterError("dims too small: parcellation region " + std::to_string(r) +
                           " is empty");
    }
  }
  return parcellation;
}

Volume plant_lesions(const LabelVolume& regions, const std::array<double, kNumRegions>& means,
                     std::uint64_t seed,
                     std::array<long long, kNumRegions>* placed_counts) {
  for (double m : means) {
    if (m < 0.0) throw ParameterError("lesion means must be >= 0");
  }

  std::array<std::vector<std::size_t>, kNumRegions> voxels_by_region;
  const Volume& vol = regions.vol;
  for (std::size_t idx = 0; idx < vol.voxel_count(); ++idx) {
    const int label = static_cast<int>(vol.data[idx]);
    if (label >= 1 && label <= kNumRegions) {
      voxels_by_region[static_cast<std::size_t>(label - 1)].push_back(idx);
    }
  }

  Volume mask(vol.dims, vol.spacing, vol.affine, Intent::mask);
  Lcg64 rng(seed);
  for (int r = 0; r < kNumRegions; ++r) {
    auto& candidates = voxels_by_region[static_cast<std::size_t>(r)];
    const long long drawn = rng.poisson(means[static_cast<std::size_t>(r)]);
    const long long count = std::min<long long>(drawn, static_cast<long long>(candidates.size()));
    // Partial Fisher-Yates over the region's ascending voxel list.
    for (long long t = 0; t < count; ++t) {
      const std::size_t pick =
          static_cast<std::size_t>(t) +
          static_cast<std::size_t>(rng.below(candidates.size() - static_cast<std::size_t>(t)));
      std::swap(candidates[static_cast<std::size_t>(t)], candidates[pick]);
      mask.data[candidates[static_cast<std::size_t>(t)]] = 1.0;
    }
    if (placed_counts) (*placed_counts)[static_cast<std::size_t>(r)] = count;
  }
  return mask;
}

namespace {

struct SubjectArtifacts {
  CohortRow row;
  std::array<long long, kNumRegions> planted{};
  Volume mask;  // retained only when emitting to disk
};

SubjectArtifacts generate_subject(const CohortSpec& spec, const LabelVolume& parcellation,
                                  int class_index, int global_index, bool keep_mask) {
  std::array<double, kNumRegions> means;
  means.fill(spec.background_rate);
  for (const EffectRegion& e : spec.effect_regions) {
    means[static_cast<std::size_t>(e.region - 1)] =
        e.mean_voxels[static_cast<std::size_t>(class_index)];
  }

  const std::uint64_t subject_seed =
      Lcg64::split(spec.seed, static_cast<std::uint64_t>(global_index));
  const std::uint64_t lesion_seed = Lcg64::split(subject_seed, 0);
  const std::uint64_t covariate_seed = Lcg64::split(subject_seed, 1);

  SubjectArtifacts out;
  Volume mask = plant_lesions(parcellation, means, lesion_seed, &out.planted);

  char id[16];
  std::snprintf(id, sizeof(id), "sub-%04d", global_index + 1);
  const RegionReport report = regional_lesion_load(mask, parcellation, mask, id);

  out.row.subject_id = id;
  out.row.diagnosis = static_cast<Diagnosis>(class_index);
  out.row.regional_wmh = report.per_region_mm3;
  out.row.global_wmh = report.global_mm3;

  Lcg64 covariates(covariate_seed);
  std::array<double, 4> brain{};
  for (std::size_t b = 0; b < 4; ++b) {
    const BrainVolumeEffect& effect = spec.brain_volume_effects[b];
    brain[b] = std::max(
        0.0, covariates.normal(effect.mean[static_cast<std::size_t>(class_index)], effect.sd));
  }
  out.row.brain_volumes = brain;
  out.row.reference_wmh =
      std::max(0.0, report.global_mm3 + covariates.normal(0.0, spec.reference_noise_sd));

  if (keep_mask) out.mask = std::move(mask);
  return out;
}

CohortTable generate_cohort(const CohortSpec& spec, const std::string* out_dir) {
  spec.validate();
  const LabelVolume parcellation = make_parcellation(spec.dims, spec.spacing);

  namespace fs = std::filesystem;
  std::vector<ManifestRow> manifest;
  nlohmann::ordered_json truth;
  std::string atlas_name;
  if (out_dir) {
    fs::create_directories(*out_dir);
    atlas_name = "atlas_labels.nii.gz";
    write_nifti(parcellation.vol, fs::path(*out_dir) / atlas_name);
    truth["seed"] = spec.seed;
    truth["subjects"] = nlohmann::ordered_json::object();
  }

  CohortTable cohort;
  int global_index = 0;
  for (int cls = 0; cls < 3; ++cls) {
    for (int s = 0; s < spec.n_per_class[static_cast<std::size_t>(cls)]; ++s, ++global_index) {
      SubjectArtifacts subject =
          generate_subject(spec, parcellation, cls, global_index, out_dir != nullptr);

      if (out_dir) {
        const std::string prob_name = subject.row.subject_id + "_prob.nii.gz";
        // The planted mask doubles as a hard probability map.
        subject.mask.intent = Intent::probability;
        write_nifti(subject.mask, fs::path(*out_dir) / prob_name);

        ManifestRow mrow;
        mrow.subject_id = subject.row.subject_id;
        mrow.diagnosis = subject.row.diagnosis;
        mrow.lesion_prob_flair_path = prob_name;
        mrow.atlas_labels_path = atlas_name;
        mrow.brain_volumes_mm3 = subject.row.brain_volumes;
        mrow.reference_wmh_mm3 = subject.row.reference_wmh;
        manifest.push_back(std::move(mrow));

        nlohmann::ordered_json entry;
        entry["diagnosis"] = diagnosis_name(subject.row.diagnosis);
        entry["planted_voxels"] = subject.planted;
        long long total = 0;
        for (long long c : subject.planted) total += c;
        entry["planted_total"] = total;
        truth["subjects"][subject.row.subject_id] = std::move(entry);
      }
      cohort.rows.push_back(std::move(subject.row));
    }
  }

  if (out_dir) {
    write_manifest((fs::path(*out_dir) / "manifest.csv").string(), manifest);
    std::ofstream os(fs::path(*out_dir) / "ground_truth.json");
    if (!os) throw IoError("cannot write ground truth JSON under " + *out_dir);
    os << truth.dump(2) << "\n";
    if (!os.good()) throw IoError("failed writing ground truth JSON under " + *out_dir);
  }
  return cohort;
}

}  // namespace

CohortTable make_cohort_table(const CohortSpec& spec) { return generate_cohort(spec, nullptr); }

CohortTable make_cohort(const CohortSpec& spec, const std::string& out_dir) {
  return generate_cohort(spec, &out_dir);
}

}  // namespace regionwise
