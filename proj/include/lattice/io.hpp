#pragma once

#include "lattice/core.hpp"
#include "lattice/properties.hpp"

#include <filesystem>
#include <string>
#include <variant>

namespace lattice::io {

/// Malformed file content. `location` is "line L, column C" for syntax
/// errors and a field path such as "struts[2].material.E" otherwise.
class ParseError : public Error {
 public:
  ParseError(const std::string& location, const std::string& message);
  std::string location;
  std::string detail;
};

inline constexpr int kFormatVersion = 1;
extern const char* const kToolVersion;

struct LatticeFile {
  int format_version = kFormatVersion;
  std::string length_unit = "m";
  std::string force_unit = "N";
  UnitCell cell;
};

struct DescriptorFile {
  int format_version = kFormatVersion;
  DescriptorSet descriptors;
  std::string tool_version = kToolVersion;
  std::string fingerprint;
};

LatticeFile parse_lattice(const std::string& text);
DescriptorFile parse_descriptors(const std::string& text);
/// Dispatches on the top-level keys ("nodes" or "G").
std::variant<LatticeFile, DescriptorFile> parse_any(const std::string& text);

/// Struts without a recorded section are written as explicit sections with
/// E = 1, so that E A, E I and lambda reproduce t, b and lambda exactly.
std::string write_lattice(const LatticeFile& file);
std::string write_descriptors(const DescriptorFile& file);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

LatticeFile load_lattice(const std::filesystem::path& path);
DescriptorFile load_descriptors(const std::filesystem::path& path);
std::variant<LatticeFile, DescriptorFile> load_any(const std::filesystem::path& path);
void save(const std::filesystem::path& path, const LatticeFile& file);
void save(const std::filesystem::path& path, const DescriptorFile& file);

/// Coefficient matrices as JSON with "omega" for undefined entries.
std::string coefficients_json(const properties::CoefficientMatrices& c);

/// Row-major CSV with a header row of 1-based node ids.
std::string matrix_csv(const Matrix& m);
std::string matrix_csv(const IntMatrix& m);
std::string matrix_csv(const ExtendedMatrix& m);

/// `v x y z` per node then `l i j` per strut.
std::string export_obj(const UnitCell& cell);

}  // namespace lattice::io
