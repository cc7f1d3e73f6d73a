#include "regionwise/nifti_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace regionwise {

namespace {

// NIfTI-1 header, 348 bytes. Field offsets follow the standard; the unused
// ANALYZE-compatibility fields are kept so the struct is byte-exact.
#pragma pack(push, 1)
struct Nifti1Header {
  std::int32_t sizeof_hdr;    // must be 348
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1;
  float intent_p2;
  float intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max;
  float cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax;
  std::int32_t glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b;
  float quatern_c;
  float quatern_d;
  float qoffset_x;
  float qoffset_y;
  float qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];  // "n+1\0" for single files
};
#pragma pack(pop)

static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kDtFloat64 = 64;

void swap_bytes(void* p, std::size_t size) {
  auto* b = static_cast<unsigned char*>(p);
  for (std::size_t i = 0; i < size / 2; ++i) std::swap(b[i], b[size - 1 - i]);
}

template <class T>
void swap_value(T& v) {
  swap_bytes(&v, sizeof(T));
}

void swap_header(Nifti1Header& h) {
  swap_value(h.sizeof_hdr);
  swap_value(h.extents);
  swap_value(h.session_error);
  for (auto& d : h.dim) swap_value(d);
  swap_value(h.intent_p1);
  swap_value(h.intent_p2);
  swap_value(h.intent_p3);
  swap_value(h.intent_code);
  swap_value(h.datatype);
  swap_value(h.bitpix);
  swap_value(h.slice_start);
  for (auto& p : h.pixdim) swap_value(p);
  swap_value(h.vox_offset);
  swap_value(h.scl_slope);
  swap_value(h.scl_inter);
  swap_value(h.slice_end);
  swap_value(h.cal_max);
  swap_value(h.cal_min);
  swap_value(h.slice_duration);
  swap_value(h.toffset);
  swap_value(h.glmax);
  swap_value(h.glmin);
  swap_value(h.qform_code);
  swap_value(h.sform_code);
  swap_value(h.quatern_b);
  swap_value(h.quatern_c);
  swap_value(h.quatern_d);
  swap_value(h.qoffset_x);
  swap_value(h.qoffset_y);
  swap_value(h.qoffset_z);
  for (auto& s : h.srow_x) swap_value(s);
  for (auto& s : h.srow_y) swap_value(s);
  for (auto& s : h.srow_z) swap_value(s);
}

// gzread handles plain files transparently, so one read path covers both.
std::vector<char> read_all_bytes(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<char> bytes;
  char chunk[1 << 16];
  int got = 0;
  while ((got = gzread(f, chunk, sizeof(chunk))) > 0) {
    bytes.insert(bytes.end(), chunk, chunk + got);
  }
  const bool failed = got < 0;
  gzclose(f);
  if (failed) {
    throw IoError("read failure on " + path.string());
  }
  return bytes;
}

Mat4 affine_from_qform(const Nifti1Header& h) {
  const double b = h.quatern_b;
  const double c = h.quatern_c;
  const double d = h.quatern_d;
  double a = 1.0 - (b * b + c * c + d * d);
  a = a < 0.0 ? 0.0 : std::sqrt(a);
  const double qfac = (h.pixdim[0] < 0.0f) ? -1.0 : 1.0;
  const double sx = h.pixdim[1];
  const double sy = h.pixdim[2];
  const double sz = h.pixdim[3] * qfac;

  Mat4 m;
  m.at(0, 0) = (a * a + b * b - c * c - d * d) * sx;
  m.at(0, 1) = (2.0 * b * c - 2.0 * a * d) * sy;
  m.at(0, 2) = (2.0 * b * d + 2.0 * a * c) * sz;
  m.at(1, 0) = (2.0 * b * c + 2.0 * a * d) * sx;
  m.at(1, 1) = (a * a + c * c - b * b - d * d) * sy;
  m.at(1, 2) = (2.0 * c * d - 2.0 * a * b) * sz;
  m.at(2, 0) = (2.0 * b * d - 2.0 * a * c) * sx;
  m.at(2, 1) = (2.0 * c * d + 2.0 * a * b) * sy;
  m.at(2, 2) = (a * a + d * d - b * b - c * c) * sz;
  m.at(0, 3) = h.qoffset_x;
  m.at(1, 3) = h.qoffset_y;
  m.at(2, 3) = h.qoffset_z;
  return m;
}

template <class T>
void decode_payload(const char* raw, std::size_t n, bool swapped, double slope, double inter,
                    bool apply_scaling, std::vector<double>& out) {
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    T value;
    std::memcpy(&value, raw + i * sizeof(T), sizeof(T));
    if (swapped) swap_value(value);
    const double v = static_cast<double>(value);
    out[i] = apply_scaling ? slope * v + inter : v;
  }
}

std::int16_t datatype_for_intent(Intent intent) {
  switch (intent) {
    case Intent::intensity:
    case Intent::probability:
      return kDtFloat32;
    case Intent::mask:
      return kDtUint8;
    case Intent::labels:
      return kDtInt16;
  }
  return kDtFloat32;
}

template <class T>
std::vector<char> encode_payload(const std::vector<double>& data) {
  std::vector<char> bytes(data.size() * sizeof(T));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const T value = static_cast<T>(data[i]);
    std::memcpy(bytes.data() + i * sizeof(T), &value, sizeof(T));
  }
  return bytes;
}

bool has_gz_suffix(const std::filesystem::path& path) {
  const std::string s = path.string();
  return s.size() >= 3 && s.compare(s.size() - 3, 3, ".gz") == 0;
}

}  // namespace

Volume read_nifti(const std::filesystem::path& path, Intent intent) {
  if (!std::filesystem::exists(path)) {
    throw IoError("file does not exist: " + path.string());
  }
  const std::vector<char> bytes = read_all_bytes(path);
  if (bytes.size() < sizeof(Nifti1Header)) {
    throw FormatError("file too short for a NIfTI-1 header: " + path.string());
  }

  Nifti1Header h;
  std::memcpy(&h, bytes.data(), sizeof(h));
  bool swapped = false;
  if (h.sizeof_hdr != 348) {
    swap_header(h);
    swapped = true;
    if (h.sizeof_hdr != 348) {
      throw FormatError("not a NIfTI-1 file (sizeof_hdr != 348): " + path.string());
    }
  }
  if (std::strncmp(h.magic, "n+1", 3) != 0) {
    throw FormatError("bad NIfTI magic in " + path.string());
  }
  if (h.dim[0] != 3 && h.dim[0] != 4) {
    std::ostringstream msg;
    msg << "unsupported dimensionality dim[0]=" << h.dim[0] << " in " << path.string();
    throw DimensionalityError(msg.str());
  }
  if (h.dim[0] == 4 && h.dim[4] > 1) {
    throw DimensionalityError("multi-frame volumes (dim[4] > 1) are not supported: " + path.string());
  }
  if (h.datatype != kDtUint8 && h.datatype != kDtInt16 && h.datatype != kDtFloat32 &&
      h.datatype != kDtFloat64) {
    std::ostringstream msg;
    msg << "unsupported datatype code " << h.datatype << " in " << path.string();
    throw UnsupportedDatatypeError(msg.str());
  }

  Volume v;
  v.intent = intent;
  for (int axis = 0; axis < 3; ++axis) {
    const std::int16_t extent = h.dim[axis + 1];
    if (extent < 1) {
      throw DimensionalityError("non-positive axis extent in " + path.string());
    }
    v.dims[static_cast<std::size_t>(axis)] = extent;
    const float sp = h.pixdim[axis + 1];
    if (!(sp > 0.0f)) {
      throw FormatError("non-positive pixdim in " + path.string());
    }
    v.spacing[static_cast<std::size_t>(axis)] = sp;
  }

  if (h.sform_code > 0) {
    for (int c = 0; c < 4; ++c) {
      v.affine.at(0, c) = h.srow_x[c];
      v.affine.at(1, c) = h.srow_y[c];
      v.affine.at(2, c) = h.srow_z[c];
    }
  } else if (h.qform_code > 0) {
    v.affine = affine_from_qform(h);
  } else {
    v.affine = Mat4::identity();
    for (int axis = 0; axis < 3; ++axis) {
      v.affine.at(axis, axis) = v.spacing[static_cast<std::size_t>(axis)];
    }
  }

  const std::size_t n = v.voxel_count();
  std::size_t bytes_per_voxel = 0;
  switch (h.datatype) {
    case kDtUint8: bytes_per_voxel = 1; break;
    case kDtInt16: bytes_per_voxel = 2; break;
    case kDtFloat32: bytes_per_voxel = 4; break;
    case kDtFloat64: bytes_per_voxel = 8; break;
  }
  std::size_t offset = static_cast<std::size_t>(h.vox_offset);
  if (offset < sizeof(Nifti1Header)) offset = sizeof(Nifti1Header);
  if (bytes.size() < offset + n * bytes_per_voxel) {
    throw IoError("truncated NIfTI payload in " + path.string());
  }

  const bool apply_scaling = h.scl_slope != 0.0f;
  const double slope = h.scl_slope;
  const double inter = h.scl_inter;
  const char* raw = bytes.data() + offset;
  switch (h.datatype) {
    case kDtUint8:
      decode_payload<std::uint8_t>(raw, n, swapped, slope, inter, apply_scaling, v.data);
      break;
    case kDtInt16:
      decode_payload<std::int16_t>(raw, n, swapped, slope, inter, apply_scaling, v.data);
      break;
    case kDtFloat32:
      decode_payload<float>(raw, n, swapped, slope, inter, apply_scaling, v.data);
      break;
    case kDtFloat64:
      decode_payload<double>(raw, n, swapped, slope, inter, apply_scaling, v.data);
      break;
  }

  v.validate();
  return v;
}

void write_nifti(const Volume& v, const std::filesystem::path& path, NiftiDatatype datatype) {
  v.validate();

  std::int16_t dt = static_cast<std::int16_t>(datatype);
  if (datatype == NiftiDatatype::automatic) dt = datatype_for_intent(v.intent);

  std::vector<char> payload;
  switch (dt) {
    case kDtUint8:
      for (double d : v.data) {
        if (d < 0.0 || d > 255.0) throw RangeError("value does not fit uint8 payload");
      }
      payload = encode_payload<std::uint8_t>(v.data);
      break;
    case kDtInt16:
      for (double d : v.data) {
        if (d < -32768.0 || d > 32767.0) throw RangeError("value does not fit int16 payload");
      }
      payload = encode_payload<std::int16_t>(v.data);
      break;
    case kDtFloat32:
      payload = encode_payload<float>(v.data);
      break;
    case kDtFloat64:
      payload = encode_payload<double>(v.data);
      break;
    default:
      throw UnsupportedDatatypeError("unsupported write datatype code");
  }

  Nifti1Header h;
  std::memset(&h, 0, sizeof(h));
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = 3;
  for (int axis = 0; axis < 3; ++axis) {
    h.dim[axis + 1] = static_cast<std::int16_t>(v.dims[static_cast<std::size_t>(axis)]);
  }
  h.dim[4] = 1;
  h.dim[5] = 1;
  h.dim[6] = 1;
  h.dim[7] = 1;
  h.datatype = dt;
  switch (dt) {
    case kDtUint8: h.bitpix = 8; break;
    case kDtInt16: h.bitpix = 16; break;
    case kDtFloat32: h.bitpix = 32; break;
    case kDtFloat64: h.bitpix = 64; break;
  }
  h.pixdim[0] = 1.0f;
  for (int axis = 0; axis < 3; ++axis) {
    h.pixdim[axis + 1] = static_cast<float>(v.spacing[static_cast<std::size_t>(axis)]);
  }
  h.vox_offset = 352.0f;
  h.scl_slope = 1.0f;
  h.scl_inter = 0.0f;
  h.xyzt_units = 2;  // millimetres
  std::strncpy(h.descrip, "regionwise", sizeof(h.descrip) - 1);
  h.qform_code = 0;
  h.sform_code = 1;
  for (int c = 0; c < 4; ++c) {
    h.srow_x[c] = static_cast<float>(v.affine.at(0, c));
    h.srow_y[c] = static_cast<float>(v.affine.at(1, c));
    h.srow_z[c] = static_cast<float>(v.affine.at(2, c));
  }
  std::memcpy(h.magic, "n+1", 4);

  const char pad[4] = {0, 0, 0, 0};  // header is padded to vox_offset 352
  if (has_gz_suffix(path)) {
    gzFile f = gzopen(path.string().c_str(), "wb");
    if (f == nullptr) throw IoError("cannot open for writing: " + path.string());
    bool ok = gzwrite(f, &h, sizeof(h)) == static_cast<int>(sizeof(h));
    ok = ok && gzwrite(f, pad, sizeof(pad)) == static_cast<int>(sizeof(pad));
    ok = ok && (payload.empty() ||
                gzwrite(f, payload.data(), static_cast<unsigned>(payload.size())) ==
                    static_cast<int>(payload.size()));
    ok = gzclose(f) == Z_OK && ok;
    if (!ok) throw IoError("write failure on " + path.string());
  } else {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(&h), sizeof(h));
    f.write(pad, sizeof(pad));
    f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!f.good()) throw IoError("write failure on " + path.string());
  }
}

}  // namespace regionwise
