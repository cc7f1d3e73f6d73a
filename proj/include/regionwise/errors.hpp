#pragma once

#include <stdexcept>
#include <string>

namespace regionwise {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File could not be opened, read, or written (includes truncated payloads).
struct IoError : Error {
  using Error::Error;
};

// Not a NIfTI-1 single file (bad magic or header size).
struct FormatError : Error {
  using Error::Error;
};

// NIfTI datatype code outside the supported set.
struct UnsupportedDatatypeError : Error {
  using Error::Error;
};

// Volume is not a 3D single-frame image.
struct DimensionalityError : Error {
  using Error::Error;
};

// Value does not fit the on-disk datatype.
struct RangeError : Error {
  using Error::Error;
};

// Two volumes do not share dims/spacing/affine within tolerance.
struct GeometryError : Error {
  using Error::Error;
};

// Malformed or inconsistent input data.
struct InputError : Error {
  using Error::Error;
};

// Out-of-range configuration parameter.
struct ParameterError : Error {
  using Error::Error;
};

// Interpolation mode not allowed for the volume's intent.
struct ModeError : Error {
  using Error::Error;
};

// Region label outside the atlas range.
struct LabelError : Error {
  using Error::Error;
};

// Matrix is singular or near-singular.
struct SingularityError : Error {
  using Error::Error;
};

// Non-finite value produced where a finite one is required.
struct NumericError : Error {
  using Error::Error;
};

// Too few observations for the requested statistic.
struct SampleSizeError : Error {
  using Error::Error;
};

// Binary labels contain only one class.
struct DegenerateLabelError : Error {
  using Error::Error;
};

// System has fewer observations than parameters.
struct UnderdeterminedError : Error {
  using Error::Error;
};

// A class has too few members to fill every fold.
struct StratificationError : Error {
  using Error::Error;
};

// Image pair unsuitable for registration (wrong intent, too small, flat).
struct RegistrationInputError : Error {
  using Error::Error;
};

}  // namespace regionwise
