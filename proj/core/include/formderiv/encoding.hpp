#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "formderiv/formula.hpp"

namespace formderiv {

inline constexpr std::size_t kDefaultMaxLength = 64;

/// Integer code per node kind plus the global encoding length. Sym and Num
/// share code 0, which doubles as padding.
class SymbolTable {
 public:
  /// Operator codes in the order +, -, x, =, integral, sum, (phi), /, sqrt,
  /// d, ln, exp, d/d, then sin, cos, power, function application.
  /// Code 7 is held by phi, which this tree model spells as a symbol.
  static SymbolTable canonical(std::size_t max_length = kDefaultMaxLength);

  /// Throws FormatError on duplicate codes, missing kinds or non-zero leaf codes.
  SymbolTable(std::array<int, kNodeKindCount> codes, std::size_t max_length);

  int code(NodeKind kind) const noexcept { return codes_[static_cast<std::size_t>(kind)]; }
  std::size_t max_length() const noexcept { return max_length_; }
  int max_code() const noexcept;

  /// Identifies the table contents; vectors from different tables do not compare.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  friend bool operator==(const SymbolTable&, const SymbolTable&) = default;

 private:
  std::array<int, kNodeKindCount> codes_;
  std::size_t max_length_;
  std::uint64_t fingerprint_;
};

/// `L_max=<n>` then one `Tag=code` line per kind.
std::string format_symbol_table(const SymbolTable& table);
SymbolTable parse_symbol_table(std::string_view text);
SymbolTable load_symbol_table(const std::filesystem::path& path);

struct FeatureVector {
  std::vector<int> values;
  std::uint64_t table = 0;  // fingerprint of the producing table, 0 if unknown

  friend bool operator==(const FeatureVector& a, const FeatureVector& b) { return a.values == b.values; }
};

/// Length of the encoding before zero padding.
std::size_t unpadded_length(const Formula& f) noexcept;

/// Depth-first: for each internal node emit [code(node), code(child)...], then
/// recurse into the non-leaf children left to right; zero-pad to L_max.
/// Throws EncodingOverflow when the unpadded length exceeds L_max.
FeatureVector encode(const Formula& f, const SymbolTable& table);

/// Number of positions that differ. Throws TableMismatch.
std::size_t distance(const FeatureVector& a, const FeatureVector& b);

/// Space-separated integers.
std::string format_vector(const FeatureVector& v);
FeatureVector parse_vector(std::string_view text);

}  // namespace formderiv
