#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "regionwise/quantify.hpp"
#include "regionwise/rng.hpp"
#include "temp_dir.hpp"

using namespace regionwise;

namespace {

Volume random_mask(std::array<int, 3> dims, double fill, std::uint64_t seed) {
  Volume v(dims, {1, 1, 1}, Mat4::identity(), Intent::mask);
  Lcg64 rng(seed);
  for (double& d : v.data) d = rng.uniform() < fill ? 1.0 : 0.0;
  return v;
}

LabelVolume random_labels(std::array<int, 3> dims, std::uint64_t seed) {
  Volume v(dims, {1, 1, 1}, Mat4::identity(), Intent::labels);
  Lcg64 rng(seed);
  for (double& d : v.data) d = static_cast<double>(rng.below(kNumRegions + 1));
  return LabelVolume(v);
}

ProbabilityStack two_class_stack(const std::vector<double>& lesion_probs,
                                 std::array<int, 3> dims = {1, 1, 1}) {
  Volume lesion(dims, {1, 1, 1}, Mat4::identity(), Intent::probability);
  Volume background = lesion;
  for (std::size_t i = 0; i < lesion_probs.size(); ++i) {
    lesion.data[i] = lesion_probs[i];
    background.data[i] = 1.0 - lesion_probs[i];
  }
  return ProbabilityStack({background, lesion}, {"background", "lesion"});
}

// Independent per-region count: nested loops over voxel coordinates and a
// plain label comparison, no shared code with the implementation.
struct OracleCounts {
  std::array<long long, kNumRegions> per_region{};
  long long outside = 0;
};

OracleCounts oracle_counts(const Volume& mask, const LabelVolume& regions) {
  OracleCounts c;
  for (int k = 0; k < mask.dims[2]; ++k) {
    for (int j = 0; j < mask.dims[1]; ++j) {
      for (int i = 0; i < mask.dims[0]; ++i) {
        if (mask.at(i, j, k) == 0.0) continue;
        const int label = static_cast<int>(regions.vol.at(i, j, k));
        if (label == 0) {
          ++c.outside;
        } else {
          ++c.per_region[static_cast<std::size_t>(label - 1)];
        }
      }
    }
  }
  return c;
}

}  // namespace

TEST_CASE("fusion averages channels and breaks argmax ties low") {
  SUBCASE("a fused (0.5, 0.5) voxel goes to class 0") {
    const auto result = fuse_probability_maps(two_class_stack({0.5}), two_class_stack({0.5}));
    CHECK(result.fused_probs.channels[0].data[0] == 0.5);
    CHECK(result.fused_probs.channels[1].data[0] == 0.5);
    CHECK(result.label_map.vol.data[0] == 0.0);
  }

  SUBCASE("lesion 0.6 on one modality and 0.8 on the other wins") {
    const auto result = fuse_probability_maps(two_class_stack({0.4}), two_class_stack({0.8}));
    CHECK(result.fused_probs.channels[1].data[0] == doctest::Approx(0.6));
    CHECK(result.label_map.vol.data[0] == 1.0);
  }

  SUBCASE("label map metadata") {
    const auto result = fuse_probability_maps(two_class_stack({0.9, 0.1}, {2, 1, 1}),
                                              two_class_stack({0.9, 0.1}, {2, 1, 1}));
    CHECK(result.label_map.vol.intent == Intent::labels);
    CHECK(result.label_map.num_regions == 1);
    CHECK(result.label_map.region_ids == std::set<int>{1});
  }
}

TEST_CASE("fusion is symmetric in its inputs") {
  Lcg64 rng(7);
  std::vector<double> pa(24);
  std::vector<double> pb(24);
  for (std::size_t i = 0; i < 24; ++i) {
    pa[i] = rng.uniform();
    pb[i] = rng.uniform();
  }
  const auto a = two_class_stack(pa, {4, 3, 2});
  const auto b = two_class_stack(pb, {4, 3, 2});

  const auto ab = fuse_probability_maps(a, b);
  const auto ba = fuse_probability_maps(b, a);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(ab.fused_probs.channels[c].data == ba.fused_probs.channels[c].data);
  }
  CHECK(ab.label_map.vol.data == ba.label_map.vol.data);
}

TEST_CASE("fused channels sum to one per voxel") {
  Lcg64 rng(13);
  auto random_three_class = [&]() {
    std::vector<Volume> ch(3, Volume({3, 3, 3}, {1, 1, 1}, Mat4::identity(), Intent::probability));
    for (std::size_t v = 0; v < 27; ++v) {
      const double a = rng.uniform();
      const double b = rng.uniform() * (1.0 - a);
      ch[0].data[v] = a;
      ch[1].data[v] = b;
      ch[2].data[v] = 1.0 - a - b;
    }
    return ProbabilityStack(std::move(ch), {"background", "wmh", "other"});
  };
  const auto fused = fuse_probability_maps(random_three_class(), random_three_class());
  for (std::size_t v = 0; v < 27; ++v) {
    double sum = 0.0;
    for (const auto& c : fused.fused_probs.channels) sum += c.data[v];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("fusion input checks") {
  const auto base = two_class_stack({0.5});

  ProbabilityStack renamed = base;
  renamed.class_names[1] = "wmh";
  CHECK_THROWS_AS(fuse_probability_maps(base, renamed), InputError);

  const auto bigger = two_class_stack({0.5, 0.5}, {2, 1, 1});
  CHECK_THROWS_AS(fuse_probability_maps(base, bigger), GeometryError);

  CHECK_THROWS_AS(fuse_probability_maps(ProbabilityStack{}, ProbabilityStack{}), InputError);
}

TEST_CASE("binarize applies the threshold inclusively") {
  Volume prob({5, 1, 1}, {1, 1, 1}, Mat4::identity(), Intent::probability);
  prob.data = {0.0, 0.49, 0.5, 0.51, 1.0};

  const Volume mask = binarize_lesions(prob, 0.5);
  CHECK(mask.intent == Intent::mask);
  CHECK(mask.data == std::vector<double>{0.0, 0.0, 1.0, 1.0, 1.0});

  const Volume strict = binarize_lesions(prob, 0.95);
  CHECK(strict.data == std::vector<double>{0.0, 0.0, 0.0, 0.0, 1.0});

  CHECK_THROWS_AS(binarize_lesions(prob, 0.0), ParameterError);
  CHECK_THROWS_AS(binarize_lesions(prob, 1.0), ParameterError);
  CHECK_THROWS_AS(binarize_lesions(prob, -2.0), ParameterError);

  Volume raw = prob;
  raw.intent = Intent::intensity;
  CHECK_THROWS_AS(binarize_lesions(raw), InputError);
}

TEST_CASE("ten lesion voxels in region 3 at 1x1x1.2 mm spacing give 12 mm3") {
  Volume labels({4, 4, 4}, {1, 1, 1.2}, Mat4::identity(), Intent::labels);
  labels.data.assign(64, 3.0);
  const LabelVolume atlas(labels);

  Volume mask({4, 4, 4}, {1, 1, 1.2}, Mat4::identity(), Intent::mask);
  for (int i = 0; i < 10; ++i) mask.data[static_cast<std::size_t>(i * 3)] = 1.0;

  const RegionReport rep = regional_lesion_load(mask, atlas, mask, "sub-0001");
  CHECK(rep.subject_id == "sub-0001");
  CHECK(rep.per_region_voxels[2] == 10);
  CHECK(rep.per_region_mm3[2] == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(rep.outside_mm3 == 0.0);
  CHECK(rep.global_mm3 == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(rep.voxel_volume_mm3 == doctest::Approx(1.2).epsilon(1e-12));
}

TEST_CASE("global volume equals regional sum plus outside bit-for-bit") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Volume mask = random_mask({6, 6, 6}, 0.4, seed);
    const LabelVolume atlas = random_labels({6, 6, 6}, seed + 1000);
    const RegionReport rep = regional_lesion_load(mask, atlas, mask);

    double sum = 0.0;
    for (double v : rep.per_region_mm3) sum += v;
    CHECK(rep.global_mm3 == sum + rep.outside_mm3);
  }
}

TEST_CASE("regional counts match a brute-force oracle") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Volume mask = random_mask({6, 6, 6}, 0.35, 2 * seed + 1);
    const LabelVolume atlas = random_labels({6, 6, 6}, 7 * seed + 3);
    const RegionReport rep = regional_lesion_load(mask, atlas, mask);
    const OracleCounts want = oracle_counts(mask, atlas);

    CHECK(rep.per_region_voxels == want.per_region);
    CHECK(rep.outside_mm3 == static_cast<double>(want.outside) * rep.voxel_volume_mm3);
    for (int r = 0; r < kNumRegions; ++r) {
      CHECK(rep.per_region_mm3[static_cast<std::size_t>(r)] ==
            static_cast<double>(want.per_region[static_cast<std::size_t>(r)]) *
                rep.voxel_volume_mm3);
    }
  }
}

TEST_CASE("adding a lesion voxel never shrinks any reported volume") {
  Volume mask = random_mask({6, 6, 6}, 0.3, 91);
  const LabelVolume atlas = random_labels({6, 6, 6}, 92);
  RegionReport before = regional_lesion_load(mask, atlas, mask);

  Lcg64 rng(93);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t v = static_cast<std::size_t>(rng.below(mask.voxel_count()));
    if (mask.data[v] != 0.0) continue;
    mask.data[v] = 1.0;
    const RegionReport after = regional_lesion_load(mask, atlas, mask);
    CHECK(after.global_mm3 >= before.global_mm3);
    CHECK(after.outside_mm3 >= before.outside_mm3);
    for (int r = 0; r < kNumRegions; ++r) {
      CHECK(after.per_region_mm3[static_cast<std::size_t>(r)] >=
            before.per_region_mm3[static_cast<std::size_t>(r)]);
    }
    before = after;
  }
}

TEST_CASE("regional load input checks") {
  const Volume mask = random_mask({4, 4, 4}, 0.5, 5);
  const LabelVolume atlas = random_labels({4, 4, 4}, 6);

  Volume wrong_intent = mask;
  wrong_intent.intent = Intent::probability;
  CHECK_THROWS_AS(regional_lesion_load(wrong_intent, atlas, mask), InputError);

  const LabelVolume other_grid = random_labels({4, 4, 5}, 7);
  CHECK_THROWS_AS(regional_lesion_load(mask, other_grid, mask), GeometryError);

  Volume tall({4, 4, 4}, {1, 1, 1}, Mat4::identity(), Intent::labels);
  tall.data.assign(64, 35.0);
  const LabelVolume high_label(tall, 40);
  CHECK_THROWS_AS(regional_lesion_load(mask, high_label, mask), LabelError);
}

TEST_CASE("dice coefficient") {
  auto mask_of = [](std::vector<double> bits) {
    Volume v({static_cast<int>(bits.size()), 1, 1}, {1, 1, 1}, Mat4::identity(), Intent::mask);
    v.data = std::move(bits);
    return v;
  };

  SUBCASE("two voxels each with one overlapping gives 0.5") {
    CHECK(dice_coefficient(mask_of({1, 1, 0, 0}), mask_of({0, 1, 1, 0})) == 0.5);
  }

  SUBCASE("identical masks give 1, disjoint masks give 0") {
    const Volume a = mask_of({1, 0, 1, 0});
    CHECK(dice_coefficient(a, a) == 1.0);
    CHECK(dice_coefficient(mask_of({1, 1, 0, 0}), mask_of({0, 0, 1, 1})) == 0.0);
  }

  SUBCASE("two empty masks agree perfectly") {
    CHECK(dice_coefficient(mask_of({0, 0, 0, 0}), mask_of({0, 0, 0, 0})) == 1.0);
  }

  SUBCASE("symmetry") {
    const Volume a = random_mask({5, 5, 5}, 0.4, 21);
    const Volume b = random_mask({5, 5, 5}, 0.4, 22);
    CHECK(dice_coefficient(a, b) == dice_coefficient(b, a));
  }

  SUBCASE("input checks") {
    Volume raw = mask_of({1, 0, 0, 0});
    raw.intent = Intent::intensity;
    CHECK_THROWS_AS(dice_coefficient(raw, mask_of({1, 0, 0, 0})), InputError);
    CHECK_THROWS_AS(dice_coefficient(mask_of({1, 0}), mask_of({1, 0, 0, 0})), GeometryError);
  }
}

TEST_CASE("histogram bins are left-closed and start at zero") {
  SUBCASE("values 0, 0.5, 1.5 with unit bins give counts 2 and 1") {
    const LoadHistogram h = load_histogram({0.0, 0.5, 1.5}, 1.0);
    CHECK(h.counts == std::vector<long long>{2, 1});
    CHECK(h.edges == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(h.total() == 3);
  }

  SUBCASE("a value on a bin edge goes to the right bin") {
    const LoadHistogram h = load_histogram({0.5}, 0.5);
    CHECK(h.counts == std::vector<long long>{0, 1});
  }

  SUBCASE("empty input gives an empty histogram") {
    const LoadHistogram h = load_histogram({}, 2.0);
    CHECK(h.counts.empty());
    CHECK(h.edges.empty());
    CHECK(h.total() == 0);
    CHECK(h.bin_width == 2.0);
  }

  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(load_histogram({1.0}, 0.0), ParameterError);
    CHECK_THROWS_AS(load_histogram({1.0}, -1.0), ParameterError);
    CHECK_THROWS_AS(load_histogram({-0.5}, 1.0), InputError);
    CHECK_THROWS_AS(load_histogram({std::nan("")}, 1.0), InputError);
  }
}

TEST_CASE("uniform draws land in histogram bins at the expected rate") {
  Lcg64 rng(424242);
  std::vector<double> values(1000);
  for (double& v : values) v = rng.uniform(0.0, 10.0);

  const LoadHistogram h = load_histogram(values, 1.0);
  REQUIRE(h.counts.size() == 10);
  CHECK(h.total() == 1000);

  // Binomial(1000, 0.1) has sd ~9.49; a 5 sigma band is [52.6, 147.4].
  for (long long c : h.counts) {
    CHECK(c > 52);
    CHECK(c < 148);
  }
}

TEST_CASE("region report CSV round trip") {
  testutil::TempDir tmp("quantify_csv");

  std::vector<RegionReport> reports;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Volume mask = random_mask({6, 6, 6}, 0.4, 100 + s);
    const LabelVolume atlas = random_labels({6, 6, 6}, 200 + s);
    RegionReport rep = regional_lesion_load(mask, atlas, mask, "sub-000" + std::to_string(s + 1));
    reports.push_back(std::move(rep));
  }

  const std::string path = tmp.file("report.csv");
  write_region_report_csv(path, reports);

  SUBCASE("header names every column in order") {
    std::ifstream f(path);
    std::string header;
    std::getline(f, header);
    std::string want = "subject_id,global_mm3,outside_mm3";
    for (int r = 1; r <= kNumRegions; ++r) {
      char buf[24];
      std::snprintf(buf, sizeof(buf), ",region_%02d_mm3", r);
      want += buf;
    }
    CHECK(header == want);
  }

  SUBCASE("volumes survive the round trip") {
    const auto back = read_region_report_csv(path);
    REQUIRE(back.size() == reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
      CHECK(back[i].subject_id == reports[i].subject_id);
      // Integer voxel counts at unit spacing are exact in 6 significant digits.
      CHECK(back[i].global_mm3 == reports[i].global_mm3);
      CHECK(back[i].outside_mm3 == reports[i].outside_mm3);
      CHECK(back[i].per_region_mm3 == reports[i].per_region_mm3);
    }
  }

  SUBCASE("large volumes keep 6 significant digits") {
    RegionReport big;
    big.subject_id = "sub-9999";
    big.per_region_mm3[0] = 123456789.0;
    big.global_mm3 = 123456789.0;
    const std::string big_path = tmp.file("big.csv");
    write_region_report_csv(big_path, {big});
    const auto back = read_region_report_csv(big_path);
    CHECK(back[0].global_mm3 == doctest::Approx(123456789.0).epsilon(1e-5));
  }
}

TEST_CASE("region report CSV reader rejects malformed input") {
  testutil::TempDir tmp("quantify_badcsv");

  CHECK_THROWS_AS(read_region_report_csv(tmp.file("missing.csv")), IoError);

  {
    std::ofstream f(tmp.file("empty.csv"));
  }
  CHECK_THROWS_AS(read_region_report_csv(tmp.file("empty.csv")), InputError);

  {
    std::ofstream f(tmp.file("badheader.csv"));
    f << "id,total\nsub-0001,5\n";
  }
  CHECK_THROWS_AS(read_region_report_csv(tmp.file("badheader.csv")), InputError);

  {
    std::ofstream f(tmp.file("shortrow.csv"));
    f << "subject_id,global_mm3,outside_mm3,region_01_mm3\nsub-0001,5,0,5\n";
  }
  CHECK_THROWS_AS(read_region_report_csv(tmp.file("shortrow.csv")), InputError);

  {
    std::ofstream f(tmp.file("alpha.csv"));
    f << "subject_id,global_mm3,outside_mm3";
    for (int r = 1; r <= kNumRegions; ++r) f << ",region_" << (r < 10 ? "0" : "") << r << "_mm3";
    f << "\nsub-0001,abc,0";
    for (int r = 0; r < kNumRegions; ++r) f << ",0";
    f << "\n";
  }
  CHECK_THROWS_AS(read_region_report_csv(tmp.file("alpha.csv")), InputError);
}
