#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "regionwise/nifti_io.hpp"
#include "regionwise/rng.hpp"
#include "regionwise/volume.hpp"
#include "temp_dir.hpp"

using namespace regionwise;

namespace {

// Raw little-endian header image plus the 4 pad bytes before vox_offset
// 352. Field offsets are from the NIfTI-1 standard.
struct RawHeader {
  std::array<unsigned char, 352> bytes{};

  void put(std::size_t off, const void* p, std::size_t n) {
    std::memcpy(bytes.data() + off, p, n);
  }
  void put_i32(std::size_t off, std::int32_t v) { put(off, &v, 4); }
  void put_i16(std::size_t off, std::int16_t v) { put(off, &v, 2); }
  void put_f32(std::size_t off, float v) { put(off, &v, 4); }
};

RawHeader minimal_header(std::array<std::int16_t, 3> dims, std::int16_t datatype,
                         std::int16_t bitpix) {
  RawHeader h;
  h.put_i32(0, 348);
  h.put_i16(40, 3);
  h.put_i16(42, dims[0]);
  h.put_i16(44, dims[1]);
  h.put_i16(46, dims[2]);
  h.put_i16(48, 1);
  h.put_i16(50, 1);
  h.put_i16(52, 1);
  h.put_i16(54, 1);
  h.put_i16(70, datatype);
  h.put_i16(72, bitpix);
  h.put_f32(76, 1.0f);
  h.put_f32(80, 1.0f);
  h.put_f32(84, 1.0f);
  h.put_f32(88, 1.0f);
  h.put_f32(108, 352.0f);
  h.put(344, "n+1", 4);
  return h;
}

void write_raw(const std::filesystem::path& p, const RawHeader& h,
               const std::vector<unsigned char>& payload) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(h.bytes.data()),
          static_cast<std::streamsize>(h.bytes.size()));
  if (!payload.empty()) {
    f.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  }
}

std::vector<unsigned char> read_raw(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(f),
                                    std::istreambuf_iterator<char>());
}

std::int16_t datatype_field(const std::vector<unsigned char>& file_bytes) {
  std::int16_t v = 0;
  std::memcpy(&v, file_bytes.data() + 70, 2);
  return v;
}

std::int16_t bitpix_field(const std::vector<unsigned char>& file_bytes) {
  std::int16_t v = 0;
  std::memcpy(&v, file_bytes.data() + 72, 2);
  return v;
}

// Writes the value's bytes reversed, producing a big-endian file on a
// little-endian host.
template <class T>
void put_swapped(RawHeader& h, std::size_t off, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  std::reverse(b, b + sizeof(T));
  h.put(off, b, sizeof(T));
}

Volume random_volume(std::array<int, 3> dims, Intent intent, std::uint64_t seed) {
  Mat4 a;
  a.at(0, 0) = 1.25;
  a.at(1, 1) = 1.0;
  a.at(2, 2) = 2.5;
  a.at(0, 3) = -12.5;
  a.at(1, 3) = 30.0;
  a.at(2, 3) = 7.75;
  Volume v(dims, {1.25, 1.0, 2.5}, a, intent);
  Lcg64 rng(seed);
  for (double& d : v.data) {
    switch (intent) {
      case Intent::intensity:
        // Cast through float so a float32 payload round-trips exactly.
        d = static_cast<double>(static_cast<float>(rng.uniform(-50.0, 150.0)));
        break;
      case Intent::probability:
        d = static_cast<double>(static_cast<float>(rng.uniform()));
        break;
      case Intent::mask:
        d = rng.uniform() < 0.4 ? 1.0 : 0.0;
        break;
      case Intent::labels:
        d = static_cast<double>(rng.below(35));
        break;
    }
  }
  return v;
}

}  // namespace

TEST_CASE("float32 write then read preserves payload, dims, spacing") {
  testutil::TempDir tmp("volio_f32");
  const Volume v = random_volume({5, 4, 3}, Intent::intensity, 11);
  const auto path = tmp.file("vol.nii");
  write_nifti(v, path);

  const Volume back = read_nifti(path, Intent::intensity);
  CHECK(back.dims == v.dims);
  CHECK(back.spacing[0] == doctest::Approx(1.25).epsilon(1e-7));
  CHECK(back.spacing[2] == doctest::Approx(2.5).epsilon(1e-7));
  REQUIRE(back.data.size() == v.data.size());
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    CHECK(back.data[i] == v.data[i]);
  }

  const auto raw = read_raw(path);
  CHECK(datatype_field(raw) == 16);
  CHECK(bitpix_field(raw) == 32);
}

TEST_CASE("payload ordering on disk is x-fastest") {
  testutil::TempDir tmp("volio_order");
  Volume v({3, 4, 5}, {1, 1, 1}, Mat4::identity(), Intent::intensity);
  for (int k = 0; k < 5; ++k) {
    for (int j = 0; j < 4; ++j) {
      for (int i = 0; i < 3; ++i) {
        v.at(i, j, k) = i + 10 * j + 100 * k;
      }
    }
  }
  const auto path = tmp.file("order.nii");
  write_nifti(v, path);
  const Volume back = read_nifti(path);
  for (int k = 0; k < 5; ++k) {
    for (int j = 0; j < 4; ++j) {
      for (int i = 0; i < 3; ++i) {
        CHECK(back.at(i, j, k) == i + 10 * j + 100 * k);
      }
    }
  }

  // First payload element (raw bytes at vox_offset) must be voxel (0,0,0);
  // the second must be (1,0,0).
  const auto raw = read_raw(path);
  float first = 0.0f;
  float second = 0.0f;
  std::memcpy(&first, raw.data() + 352, 4);
  std::memcpy(&second, raw.data() + 356, 4);
  CHECK(first == 0.0f);
  CHECK(second == 1.0f);
}

TEST_CASE("mask volumes get datatype code 2 in the header") {
  testutil::TempDir tmp("volio_mask");
  const Volume v = random_volume({4, 4, 4}, Intent::mask, 3);
  const auto path = tmp.file("mask.nii");
  write_nifti(v, path);

  const auto raw = read_raw(path);
  CHECK(datatype_field(raw) == 2);
  CHECK(bitpix_field(raw) == 8);

  const Volume back = read_nifti(path, Intent::mask);
  CHECK(back.intent == Intent::mask);
  CHECK(back.data == v.data);
}

TEST_CASE("label volumes get datatype code 4 in the header") {
  testutil::TempDir tmp("volio_labels");
  Volume v = random_volume({4, 4, 4}, Intent::labels, 9);
  v.data[0] = 34.0;  // exercise the top of the atlas range
  const auto path = tmp.file("labels.nii");
  write_nifti(v, path);

  const auto raw = read_raw(path);
  CHECK(datatype_field(raw) == 4);
  CHECK(bitpix_field(raw) == 16);

  const Volume back = read_nifti(path, Intent::labels);
  CHECK(back.intent == Intent::labels);
  CHECK(back.data == v.data);
}

TEST_CASE("explicit float64 datatype preserves doubles bit-exactly") {
  testutil::TempDir tmp("volio_f64");
  Volume v({3, 3, 3}, {1, 1, 1}, Mat4::identity(), Intent::intensity);
  Lcg64 rng(17);
  for (double& d : v.data) d = rng.uniform(-1e6, 1e6);
  const auto path = tmp.file("wide.nii");
  write_nifti(v, path, NiftiDatatype::float64);

  const auto raw = read_raw(path);
  CHECK(datatype_field(raw) == 64);
  CHECK(bitpix_field(raw) == 64);

  const Volume back = read_nifti(path);
  CHECK(back.data == v.data);
}

TEST_CASE("affine round-trips through the sform within 1e-5") {
  testutil::TempDir tmp("volio_affine");
  Mat4 a;
  a.at(0, 0) = 0.96593;
  a.at(0, 1) = -0.25882;
  a.at(1, 0) = 0.25882;
  a.at(1, 1) = 0.96593;
  a.at(2, 2) = 3.0;
  a.at(0, 3) = -87.25;
  a.at(1, 3) = 120.5;
  a.at(2, 3) = -14.125;
  Volume v({4, 4, 4}, {1, 1, 3}, a, Intent::intensity);
  const auto path = tmp.file("affine.nii");
  write_nifti(v, path);
  const Volume back = read_nifti(path);
  CHECK(max_abs_diff(back.affine, a) < 1e-5);
}

TEST_CASE("scl_slope and scl_inter rescale raw values") {
  testutil::TempDir tmp("volio_scl");
  RawHeader h = minimal_header({1, 1, 1}, 2, 8);
  h.put_f32(112, 2.0f);  // scl_slope
  h.put_f32(116, 1.0f);  // scl_inter
  const auto path = tmp.file("scaled.nii");
  write_raw(path, h, {3});

  const Volume v = read_nifti(path);
  REQUIRE(v.data.size() == 1);
  CHECK(v.data[0] == 7.0);

  SUBCASE("slope zero disables scaling and ignores the intercept") {
    RawHeader h2 = minimal_header({1, 1, 1}, 2, 8);
    h2.put_f32(112, 0.0f);
    h2.put_f32(116, 5.0f);
    const auto p2 = tmp.file("unscaled.nii");
    write_raw(p2, h2, {3});
    const Volume u = read_nifti(p2);
    CHECK(u.data[0] == 3.0);
  }
}

TEST_CASE("big-endian files are detected and byte-swapped") {
  testutil::TempDir tmp("volio_be");
  RawHeader h;
  put_swapped<std::int32_t>(h, 0, 348);
  put_swapped<std::int16_t>(h, 40, 3);
  put_swapped<std::int16_t>(h, 42, 2);
  put_swapped<std::int16_t>(h, 44, 2);
  put_swapped<std::int16_t>(h, 46, 1);
  for (std::size_t a = 4; a < 8; ++a) put_swapped<std::int16_t>(h, 40 + 2 * a, 1);
  put_swapped<std::int16_t>(h, 70, 16);
  put_swapped<std::int16_t>(h, 72, 32);
  put_swapped<float>(h, 76, 1.0f);
  put_swapped<float>(h, 80, 1.5f);
  put_swapped<float>(h, 84, 2.0f);
  put_swapped<float>(h, 88, 2.5f);
  put_swapped<float>(h, 108, 352.0f);
  h.put(344, "n+1", 4);

  const float values[4] = {1.5f, -2.25f, 8.0f, 0.125f};
  std::vector<unsigned char> payload(16);
  for (int i = 0; i < 4; ++i) {
    unsigned char b[4];
    std::memcpy(b, &values[i], 4);
    std::reverse(b, b + 4);
    std::memcpy(payload.data() + 4 * i, b, 4);
  }
  const auto path = tmp.file("bigend.nii");
  write_raw(path, h, payload);

  const Volume v = read_nifti(path);
  CHECK(v.dims == std::array<int, 3>{2, 2, 1});
  CHECK(v.spacing[0] == doctest::Approx(1.5));
  CHECK(v.spacing[1] == doctest::Approx(2.0));
  CHECK(v.spacing[2] == doctest::Approx(2.5));
  for (int i = 0; i < 4; ++i) CHECK(v.data[static_cast<std::size_t>(i)] == values[i]);
}

TEST_CASE("qform is used when no sform is present") {
  testutil::TempDir tmp("volio_qform");
  RawHeader h = minimal_header({2, 2, 2}, 16, 32);
  h.put_f32(80, 2.0f);  // pixdim[1..3]
  h.put_f32(84, 3.0f);
  h.put_f32(88, 4.0f);
  h.put_i16(252, 1);  // qform_code
  h.put_f32(268, 10.0f);  // qoffset
  h.put_f32(272, -5.0f);
  h.put_f32(276, 2.5f);
  std::vector<unsigned char> payload(32, 0);

  SUBCASE("identity quaternion gives a spacing diagonal plus offset") {
    const auto path = tmp.file("qform.nii");
    write_raw(path, h, payload);
    const Volume v = read_nifti(path);
    CHECK(v.affine.at(0, 0) == doctest::Approx(2.0));
    CHECK(v.affine.at(1, 1) == doctest::Approx(3.0));
    CHECK(v.affine.at(2, 2) == doctest::Approx(4.0));
    CHECK(v.affine.at(0, 1) == 0.0);
    CHECK(v.affine.at(0, 3) == doctest::Approx(10.0));
    CHECK(v.affine.at(1, 3) == doctest::Approx(-5.0));
    CHECK(v.affine.at(2, 3) == doctest::Approx(2.5));
  }

  SUBCASE("negative pixdim[0] flips the z column") {
    h.put_f32(76, -1.0f);
    const auto path = tmp.file("qform_neg.nii");
    write_raw(path, h, payload);
    const Volume v = read_nifti(path);
    CHECK(v.affine.at(2, 2) == doctest::Approx(-4.0));
  }

  SUBCASE("sform wins when both codes are set") {
    h.put_i16(254, 1);  // sform_code
    h.put_f32(280, 7.0f);   // srow_x = (7, 0, 0, 1)
    h.put_f32(292, 1.0f);
    h.put_f32(300, 7.0f);   // srow_y = (0, 7, 0, 2)
    h.put_f32(308, 2.0f);
    h.put_f32(320, 7.0f);   // srow_z = (0, 0, 7, 3)
    h.put_f32(324, 3.0f);
    const auto path = tmp.file("both.nii");
    write_raw(path, h, payload);
    const Volume v = read_nifti(path);
    CHECK(v.affine.at(0, 0) == 7.0);
    CHECK(v.affine.at(1, 1) == 7.0);
    CHECK(v.affine.at(2, 2) == 7.0);
    CHECK(v.affine.at(0, 3) == 1.0);
    CHECK(v.affine.at(1, 3) == 2.0);
    CHECK(v.affine.at(2, 3) == 3.0);
  }
}

TEST_CASE("vox_offset beyond 352 skips extension bytes") {
  testutil::TempDir tmp("volio_ext");
  RawHeader h = minimal_header({1, 1, 1}, 2, 8);
  h.put_f32(108, 368.0f);
  // 16 junk bytes between the pad and the payload, then the voxel.
  std::vector<unsigned char> payload(16, 0xAB);
  payload.push_back(9);
  const auto path = tmp.file("ext.nii");
  write_raw(path, h, payload);
  const Volume v = read_nifti(path);
  CHECK(v.data[0] == 9.0);
}

TEST_CASE("gzip output has the gzip magic and reads back identically") {
  testutil::TempDir tmp("volio_gz");
  const Volume v = random_volume({6, 5, 4}, Intent::probability, 23);
  const auto path = tmp.file("vol.nii.gz");
  write_nifti(v, path);

  const auto raw = read_raw(path);
  REQUIRE(raw.size() >= 2);
  CHECK(raw[0] == 0x1f);
  CHECK(raw[1] == 0x8b);

  const Volume back = read_nifti(path, Intent::probability);
  CHECK(back.data == v.data);
  CHECK(back.dims == v.dims);
}

TEST_CASE("read failures raise typed errors") {
  testutil::TempDir tmp("volio_err");

  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_nifti(tmp.file("nope.nii")), IoError);
  }

  SUBCASE("file shorter than a header") {
    const auto path = tmp.file("short.nii");
    std::ofstream(path, std::ios::binary).write("abc", 3);
    CHECK_THROWS_AS(read_nifti(path), FormatError);
  }

  SUBCASE("wrong sizeof_hdr in either byte order") {
    RawHeader h = minimal_header({1, 1, 1}, 2, 8);
    h.put_i32(0, 123);
    const auto path = tmp.file("badsize.nii");
    write_raw(path, h, {0});
    CHECK_THROWS_AS(read_nifti(path), FormatError);
  }

  SUBCASE("bad magic") {
    RawHeader h = minimal_header({1, 1, 1}, 2, 8);
    h.put(344, "abc", 4);
    const auto path = tmp.file("badmagic.nii");
    write_raw(path, h, {0});
    CHECK_THROWS_AS(read_nifti(path), FormatError);
  }

  SUBCASE("unsupported datatype code") {
    RawHeader h = minimal_header({1, 1, 1}, 8, 32);  // int32 is not supported
    const auto path = tmp.file("baddt.nii");
    write_raw(path, h, {0, 0, 0, 0});
    CHECK_THROWS_AS(read_nifti(path), UnsupportedDatatypeError);
  }

  SUBCASE("dim[0] outside 3..4") {
    RawHeader h = minimal_header({1, 1, 1}, 2, 8);
    h.put_i16(40, 2);
    const auto path = tmp.file("dim2.nii");
    write_raw(path, h, {0});
    CHECK_THROWS_AS(read_nifti(path), DimensionalityError);

    h.put_i16(40, 5);
    const auto path5 = tmp.file("dim5.nii");
    write_raw(path5, h, {0});
    CHECK_THROWS_AS(read_nifti(path5), DimensionalityError);
  }

  SUBCASE("multi-frame dim[4] > 1") {
    RawHeader h = minimal_header({1, 1, 1}, 2, 8);
    h.put_i16(40, 4);
    h.put_i16(48, 3);
    const auto path = tmp.file("frames.nii");
    write_raw(path, h, {0, 0, 0});
    CHECK_THROWS_AS(read_nifti(path), DimensionalityError);
  }

  SUBCASE("truncated payload") {
    RawHeader h = minimal_header({4, 4, 4}, 16, 32);
    std::vector<unsigned char> payload(10, 0);  // needs 256 bytes
    const auto path = tmp.file("trunc.nii");
    write_raw(path, h, payload);
    CHECK_THROWS_AS(read_nifti(path), IoError);
  }

  SUBCASE("non-positive pixdim") {
    RawHeader h = minimal_header({2, 2, 2}, 2, 8);
    h.put_f32(80, 0.0f);
    const auto path = tmp.file("badpix.nii");
    write_raw(path, h, std::vector<unsigned char>(8, 0));
    CHECK_THROWS_AS(read_nifti(path), FormatError);
  }
}

TEST_CASE("declared intent is validated on read") {
  testutil::TempDir tmp("volio_intent");
  Volume v({2, 2, 2}, {1, 1, 1}, Mat4::identity(), Intent::intensity);
  v.data.assign(8, -1.0);
  const auto path = tmp.file("neg.nii");
  write_nifti(v, path);

  CHECK_NOTHROW(read_nifti(path, Intent::intensity));
  CHECK_THROWS_AS(read_nifti(path, Intent::probability), InputError);
  CHECK_THROWS_AS(read_nifti(path, Intent::mask), InputError);
  CHECK_THROWS_AS(read_nifti(path, Intent::labels), InputError);
}

TEST_CASE("write failures raise typed errors") {
  testutil::TempDir tmp("volio_werr");

  SUBCASE("label above 32767 does not fit int16") {
    Volume v({1, 1, 1}, {1, 1, 1}, Mat4::identity(), Intent::labels);
    v.data[0] = 40000.0;
    CHECK_THROWS_AS(write_nifti(v, tmp.file("big_label.nii")), RangeError);
  }

  SUBCASE("uint8 override rejects values above 255") {
    Volume v({1, 1, 1}, {1, 1, 1}, Mat4::identity(), Intent::intensity);
    v.data[0] = 300.0;
    CHECK_THROWS_AS(write_nifti(v, tmp.file("wide_u8.nii"), NiftiDatatype::uint8), RangeError);
  }

  SUBCASE("invalid volume is rejected before touching the disk") {
    Volume v({2, 2, 2}, {1, 1, 1}, Mat4::identity(), Intent::mask);
    v.data[3] = 0.5;
    const auto path = tmp.file("badmask.nii");
    CHECK_THROWS_AS(write_nifti(v, path), InputError);
    CHECK(!std::filesystem::exists(path));
  }

  SUBCASE("unwritable directory") {
    Volume v({1, 1, 1}, {1, 1, 1}, Mat4::identity(), Intent::intensity);
    CHECK_THROWS_AS(write_nifti(v, tmp.file("no_such_dir") + "/x.nii"), IoError);
  }
}

TEST_CASE("Volume::validate enforces the intent contract") {
  Volume v({2, 2, 2}, {1, 1, 1}, Mat4::identity(), Intent::probability);

  SUBCASE("probability values stay inside [0, 1]") {
    v.data[0] = 1.0;
    CHECK_NOTHROW(v.validate());
    v.data[0] = 1.5;
    CHECK_THROWS_AS(v.validate(), InputError);
    v.data[0] = -0.1;
    CHECK_THROWS_AS(v.validate(), InputError);
  }

  SUBCASE("mask values are exactly 0 or 1") {
    v.intent = Intent::mask;
    v.data[5] = 1.0;
    CHECK_NOTHROW(v.validate());
    v.data[5] = 0.25;
    CHECK_THROWS_AS(v.validate(), InputError);
  }

  SUBCASE("labels are non-negative integers") {
    v.intent = Intent::labels;
    v.data[1] = 12.0;
    CHECK_NOTHROW(v.validate());
    v.data[1] = 2.5;
    CHECK_THROWS_AS(v.validate(), InputError);
    v.data[1] = -3.0;
    CHECK_THROWS_AS(v.validate(), InputError);
  }

  SUBCASE("shape mismatches and bad spacing") {
    v.intent = Intent::intensity;
    v.data.resize(7);
    CHECK_THROWS_AS(v.validate(), InputError);
    v.data.resize(8);
    v.spacing[1] = 0.0;
    CHECK_THROWS_AS(v.validate(), InputError);
    v.spacing[1] = 1.0;
    v.dims[2] = 0;
    CHECK_THROWS_AS(v.validate(), InputError);
  }
}

TEST_CASE("validate_geometry compares dims, spacing, affine within tol") {
  Volume a({3, 3, 3}, {1, 1, 1}, Mat4::identity(), Intent::intensity);
  Volume b = a;
  CHECK(validate_geometry(a, b));

  SUBCASE("spacing off by 0.01 fails the default 1e-3 tolerance") {
    b.spacing[0] = 1.01;
    CHECK(!validate_geometry(a, b));
    CHECK(validate_geometry(a, b, 0.02));
  }

  SUBCASE("affine translation off by 5e-4 passes the default tolerance") {
    b.affine.at(0, 3) = 5e-4;
    CHECK(validate_geometry(a, b));
    CHECK(!validate_geometry(a, b, 1e-5));
  }

  SUBCASE("different dims always fail") {
    b.dims = {3, 3, 4};
    b.data.assign(b.voxel_count(), 0.0);
    CHECK(!validate_geometry(a, b, 1e9));
  }
}

TEST_CASE("LabelVolume collects present region ids and bounds labels") {
  Volume v({3, 1, 1}, {1, 1, 1}, Mat4::identity(), Intent::labels);
  v.data = {0.0, 7.0, 34.0};
  const LabelVolume lv(v);
  CHECK(lv.region_ids == std::set<int>{7, 34});
  CHECK(lv.num_regions == 34);

  v.data = {0.0, 35.0, 1.0};
  CHECK_THROWS_AS(LabelVolume{v}, LabelError);

  Volume w({1, 1, 1}, {1, 1, 1}, Mat4::identity(), Intent::intensity);
  CHECK_THROWS_AS(LabelVolume{w}, InputError);
}

TEST_CASE("ProbabilityStack checks channels sum to one per voxel") {
  auto channel = [](double p) {
    Volume v({2, 2, 2}, {1, 1, 1}, Mat4::identity(), Intent::probability);
    v.data.assign(8, p);
    return v;
  };

  SUBCASE("well-formed two-class stack") {
    const ProbabilityStack s({channel(0.3), channel(0.7)}, {"background", "lesion"});
    CHECK(s.num_classes() == 2);
  }

  SUBCASE("sum slack of 1e-4 is accepted") {
    CHECK_NOTHROW(ProbabilityStack({channel(0.29995), channel(0.7)}, {"a", "b"}));
  }

  SUBCASE("sum clearly off one is rejected") {
    CHECK_THROWS_AS(ProbabilityStack({channel(0.3), channel(0.6)}, {"a", "b"}), InputError);
  }

  SUBCASE("geometry mismatch is rejected") {
    Volume other({2, 2, 3}, {1, 1, 1}, Mat4::identity(), Intent::probability);
    other.data.assign(12, 0.7);
    CHECK_THROWS_AS(ProbabilityStack({channel(0.3), other}, {"a", "b"}), GeometryError);
  }

  SUBCASE("non-probability channel is rejected") {
    Volume raw({2, 2, 2}, {1, 1, 1}, Mat4::identity(), Intent::intensity);
    raw.data.assign(8, 0.7);
    CHECK_THROWS_AS(ProbabilityStack({channel(0.3), raw}, {"a", "b"}), InputError);
  }

  SUBCASE("name count must match channel count") {
    CHECK_THROWS_AS(ProbabilityStack({channel(0.5), channel(0.5)}, {"only"}), InputError);
  }
}
