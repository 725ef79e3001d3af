#include "formderiv/encoding.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "formderiv/error.hpp"
#include "formderiv/rewrite.hpp"
#include "text_util.hpp"

namespace formderiv {

namespace {

std::uint64_t compute_fingerprint(const std::array<int, kNodeKindCount>& codes, std::size_t max_length) {
  std::string text = std::to_string(max_length);
  for (int c : codes) {
    text += ',';
    text += std::to_string(c);
  }
  return fnv1a(text);
}

int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw FormatError("expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

SymbolTable SymbolTable::canonical(std::size_t max_length) {
  std::array<int, kNodeKindCount> codes{};
  auto set = [&](NodeKind k, int c) { codes[static_cast<std::size_t>(k)] = c; };
  set(NodeKind::Sym, 0);
  set(NodeKind::Num, 0);
  set(NodeKind::Plus, 1);
  set(NodeKind::Minus, 2);
  set(NodeKind::Times, 3);
  set(NodeKind::Equal, 4);
  set(NodeKind::Integral, 5);
  set(NodeKind::Sum, 6);
  set(NodeKind::Divide, 8);
  set(NodeKind::Sqrt, 9);
  set(NodeKind::Differential, 10);
  set(NodeKind::Ln, 11);
  set(NodeKind::Exp, 12);
  set(NodeKind::DerivRatio, 13);
  set(NodeKind::Sin, 14);
  set(NodeKind::Cos, 15);
  set(NodeKind::Power, 16);
  set(NodeKind::FuncApply, 17);
  return SymbolTable(codes, max_length);
}

SymbolTable::SymbolTable(std::array<int, kNodeKindCount> codes, std::size_t max_length)
    : codes_(codes), max_length_(max_length), fingerprint_(compute_fingerprint(codes, max_length)) {
  if (max_length_ == 0) throw FormatError("L_max must be positive");
  if (code(NodeKind::Sym) != 0 || code(NodeKind::Num) != 0) throw FormatError("Sym and Num must both encode as 0");
  std::set<int> seen;
  for (std::size_t i = 0; i < kNodeKindCount; ++i) {
    auto kind = static_cast<NodeKind>(i);
    if (is_leaf_kind(kind)) continue;
    if (codes_[i] <= 0) throw FormatError(std::string(kind_name(kind)) + " needs a positive code");
    if (!seen.insert(codes_[i]).second) throw FormatError("code " + std::to_string(codes_[i]) + " used twice");
  }
}

int SymbolTable::max_code() const noexcept { return *std::max_element(codes_.begin(), codes_.end()); }

std::string format_symbol_table(const SymbolTable& table) {
  std::string out = "L_max=" + std::to_string(table.max_length()) + "\n";
  for (std::size_t i = 0; i < kNodeKindCount; ++i) {
    auto kind = static_cast<NodeKind>(i);
    out += kind_name(kind);
    out += '=';
    out += std::to_string(table.code(kind));
    out += '\n';
  }
  return out;
}

SymbolTable parse_symbol_table(std::string_view text) {
  std::array<int, kNodeKindCount> codes{};
  std::array<bool, kNodeKindCount> present{};
  std::size_t max_length = 0;
  for (auto raw : detail::split_lines(text)) {
    auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("symbol table line lacks '=': '" + std::string(line) + "'");
    auto key = detail::trim(line.substr(0, eq));
    int value = parse_int(detail::trim(line.substr(eq + 1)));
    if (key == "L_max") {
      if (value <= 0) throw FormatError("L_max must be positive");
      max_length = static_cast<std::size_t>(value);
      continue;
    }
    auto kind = kind_from_name(key);
    if (!kind) throw FormatError("unknown node kind '" + std::string(key) + "' in symbol table");
    codes[static_cast<std::size_t>(*kind)] = value;
    present[static_cast<std::size_t>(*kind)] = true;
  }
  if (max_length == 0) throw FormatError("symbol table lacks L_max");
  for (std::size_t i = 0; i < kNodeKindCount; ++i) {
    if (!present[i]) throw FormatError("symbol table lacks " + std::string(kind_name(static_cast<NodeKind>(i))));
  }
  return SymbolTable(codes, max_length);
}

SymbolTable load_symbol_table(const std::filesystem::path& path) {
  return parse_symbol_table(detail::read_file(path));
}

std::size_t unpadded_length(const Formula& f) noexcept {
  if (f.is_leaf()) return 0;
  std::size_t n = 1 + f.arity();
  for (const auto& c : f.children()) n += unpadded_length(c);
  return n;
}

namespace {

void encode_rec(const Formula& f, const SymbolTable& table, std::vector<int>& out) {
  out.push_back(table.code(f.kind()));
  for (const auto& c : f.children()) out.push_back(table.code(c.kind()));
  for (const auto& c : f.children()) {
    if (!c.is_leaf()) encode_rec(c, table, out);
  }
}

}  // namespace

FeatureVector encode(const Formula& f, const SymbolTable& table) {
  const std::size_t len = unpadded_length(f);
  if (len > table.max_length()) {
    throw EncodingOverflow("encoding needs " + std::to_string(len) + " slots, L_max is " +
                           std::to_string(table.max_length()));
  }
  FeatureVector v;
  v.table = table.fingerprint();
  v.values.reserve(table.max_length());
  if (!f.is_leaf()) encode_rec(f, table, v.values);
  v.values.resize(table.max_length(), 0);
  return v;
}

std::size_t distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.values.size() != b.values.size()) {
    throw TableMismatch("vectors have lengths " + std::to_string(a.values.size()) + " and " +
                        std::to_string(b.values.size()));
  }
  if (a.table != 0 && b.table != 0 && a.table != b.table) {
    throw TableMismatch("vectors were encoded under different symbol tables");
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) d += a.values[i] != b.values[i];
  return d;
}

std::string format_vector(const FeatureVector& v) {
  std::string out;
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(v.values[i]);
  }
  return out;
}

FeatureVector parse_vector(std::string_view text) {
  FeatureVector v;
  for (auto tok : detail::split(detail::trim(text), ' ')) {
    if (tok.empty()) continue;
    v.values.push_back(parse_int(tok));
  }
  return v;
}

}  // namespace formderiv
