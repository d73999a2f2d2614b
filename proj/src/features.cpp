#include "vsid/features.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>

#include "vsid/binary_io.hpp"
#include "vsid/error.hpp"

namespace vsid {
namespace {

constexpr char kFeatureMagic[9] = "VSIDFEAT";
constexpr std::uint32_t kFeatureVersion = 1;

constexpr std::array<std::pair<FeatureKind, std::string_view>, 7> kKindNames{{
    {FeatureKind::kAcrlag, "ACRLAG"},
    {FeatureKind::kMfcc, "MFCC"},
    {FeatureKind::kLfcc, "LFCC"},
    {FeatureKind::kLpcc, "LPCC"},
    {FeatureKind::kLsf, "LSF"},
    {FeatureKind::kLar, "LAR"},
    {FeatureKind::kPlpcc, "PLPCC"},
}};

}  // namespace

std::string_view FeatureKindName(FeatureKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "UNKNOWN";
}

FeatureKind ParseFeatureKind(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (const auto& [k, n] : kKindNames)
    if (n == upper) return k;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown feature kind '" + std::string(name) + "'");
}

FeatureMatrix::FeatureMatrix(FeatureKind kind, std::size_t dim)
    : kind_(kind), dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::kDimError, "feature dimension must be positive");
}

FeatureMatrix::FeatureMatrix(FeatureKind kind, std::size_t dim,
                             std::vector<double> values)
    : FeatureMatrix(kind, dim) {
  if (values.size() % dim != 0)
    throw Error(ErrorCode::kDimError, "value count is not a multiple of dim");
  values_ = std::move(values);
}

void FeatureMatrix::AppendRow(std::span<const double> row) {
  if (row.size() != dim_)
    throw Error(ErrorCode::kDimError, "row of length " + std::to_string(row.size()) +
                                          " appended to dim " + std::to_string(dim_));
  values_.insert(values_.end(), row.begin(), row.end());
}

void FeatureMatrix::Append(const FeatureMatrix& other) {
  if (other.kind_ != kind_)
    throw Error(ErrorCode::kFeatureKindMismatch,
                std::string(FeatureKindName(other.kind_)) + " appended to " +
                    std::string(FeatureKindName(kind_)));
  if (other.dim_ != dim_) throw Error(ErrorCode::kDimError, "dimension mismatch");
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
}

void WriteFeatures(std::ostream& out, const FeatureMatrix& m) {
  out.write(kFeatureMagic, 8);
  io::Put<std::uint32_t>(out, kFeatureVersion);
  io::PutString(out, std::string(FeatureKindName(m.kind())));
  io::Put<std::uint64_t>(out, m.rows());
  io::Put<std::uint64_t>(out, m.dim());
  for (double v : m.values()) io::Put<double>(out, v);
}

FeatureMatrix ReadFeatures(std::istream& in) {
  io::ExpectMagic(in, kFeatureMagic, "feature");
  const auto version = io::Get<std::uint32_t>(in, "version");
  if (version != kFeatureVersion)
    throw Error(ErrorCode::kFormatError,
                "unsupported feature file version " + std::to_string(version));
  const FeatureKind kind = ParseFeatureKind(io::GetString(in, "kind", 64));
  const auto rows = io::Get<std::uint64_t>(in, "rows");
  const auto cols = io::Get<std::uint64_t>(in, "cols");
  if (cols == 0 || cols > (1u << 16) || rows > (1ull << 32))
    throw Error(ErrorCode::kFormatError, "implausible feature matrix shape");
  std::vector<double> values(rows * cols);
  for (double& v : values) v = io::Get<double>(in, "values");
  return FeatureMatrix(kind, cols, std::move(values));
}

void SaveFeatures(const std::string& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  WriteFeatures(out, m);
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path);
}

FeatureMatrix LoadFeatures(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return ReadFeatures(in);
}

void WriteFeaturesCsv(std::ostream& out, const FeatureMatrix& m) {
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.dim(); ++c) {
      if (c) out << ',';
      auto res = std::to_chars(buf, buf + sizeof(buf), m(r, c));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace vsid
