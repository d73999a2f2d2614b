#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vsid {

enum class FeatureKind { kAcrlag, kMfcc, kLfcc, kLpcc, kLsf, kLar, kPlpcc };

std::string_view FeatureKindName(FeatureKind kind);
FeatureKind ParseFeatureKind(std::string_view name);  // case-insensitive

// Row-major frames x dim matrix of one feature stream.
class FeatureMatrix {
 public:
  FeatureMatrix(FeatureKind kind, std::size_t dim);
  FeatureMatrix(FeatureKind kind, std::size_t dim, std::vector<double> values);

  FeatureKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool empty() const { return values_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * dim_ + c]; }
  const std::vector<double>& values() const { return values_; }

  void AppendRow(std::span<const double> row);
  // Both matrices must share kind and dimension.
  void Append(const FeatureMatrix& other);

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  FeatureKind kind_;
  std::size_t dim_;
  std::vector<double> values_;
};

// Binary layout (little-endian):
//   char[8]  magic "VSIDFEAT"
//   u32      version (1)
//   u32      kind-name length, then that many bytes (e.g. "ACRLAG")
//   u64      rows
//   u64      cols
//   f64      rows*cols values, row-major
void WriteFeatures(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix ReadFeatures(std::istream& in);
void SaveFeatures(const std::string& path, const FeatureMatrix& m);
FeatureMatrix LoadFeatures(const std::string& path);

// One row per frame, comma-separated, full round-trip precision.
void WriteFeaturesCsv(std::ostream& out, const FeatureMatrix& m);

}  // namespace vsid
