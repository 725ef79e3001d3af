#pragma once

// Deliberately naive reference implementations. They share no code with the
// library beyond the tree accessors and the printer.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "formderiv/encoding.hpp"
#include "formderiv/formula.hpp"
#include "formderiv/pattern.hpp"

namespace formderiv::testkit {

// Bindings as printed text, so equality is string equality.
using TextBinding = std::map<std::string, std::string>;

inline bool oracle_match_into(const Formula& s, const Formula& p, const PatternVarSet& vars, TextBinding& b) {
  if (p.kind() == NodeKind::Sym && vars.count(std::string(p.label()))) {
    const std::string text = print(s);
    auto [it, fresh] = b.emplace(std::string(p.label()), text);
    return fresh || it->second == text;
  }
  if (s.kind() != p.kind() || s.label() != p.label() || s.arity() != p.arity()) return false;
  for (std::size_t i = 0; i < s.arity(); ++i) {
    if (!oracle_match_into(s.child(i), p.child(i), vars, b)) return false;
  }
  return true;
}

inline std::optional<TextBinding> oracle_match(const Formula& s, const Formula& p, const PatternVarSet& vars) {
  TextBinding b;
  if (!oracle_match_into(s, p, vars, b)) return std::nullopt;
  return b;
}

// Pre-order (node, then children left to right) list of every path.
inline void oracle_paths_into(const Formula& f, std::vector<std::size_t>& cur, std::vector<std::vector<std::size_t>>& out) {
  out.push_back(cur);
  for (std::size_t i = 0; i < f.arity(); ++i) {
    cur.push_back(i);
    oracle_paths_into(f.child(i), cur, out);
    cur.pop_back();
  }
}

inline std::vector<std::vector<std::size_t>> oracle_paths(const Formula& f) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  oracle_paths_into(f, cur, out);
  return out;
}

inline const Formula& oracle_at(const Formula& f, const std::vector<std::size_t>& path) {
  const Formula* cur = &f;
  for (auto i : path) cur = &cur->child(i);
  return *cur;
}

struct OracleMatch {
  std::vector<std::size_t> site;
  TextBinding binding;
};

inline std::vector<OracleMatch> oracle_find_all(const Formula& f, const Formula& p, const PatternVarSet& vars) {
  std::vector<OracleMatch> out;
  for (const auto& path : oracle_paths(f)) {
    if (auto b = oracle_match(oracle_at(f, path), p, vars)) out.push_back({path, std::move(*b)});
  }
  return out;
}

inline TextBinding as_text(const Binding& b) {
  TextBinding out;
  for (const auto& [k, v] : b) out.emplace(k, print(v));
  return out;
}

// The depth-first encoding written out by hand: each internal node emits its
// own code followed by its children's codes, then the walk descends into the
// internal children in order.
inline void oracle_encode_into(const Formula& f, const std::map<NodeKind, int>& codes, std::vector<int>& out) {
  if (f.arity() == 0 && (f.kind() == NodeKind::Sym || f.kind() == NodeKind::Num)) return;
  out.push_back(codes.at(f.kind()));
  for (std::size_t i = 0; i < f.arity(); ++i) {
    const Formula& c = f.child(i);
    out.push_back((c.kind() == NodeKind::Sym || c.kind() == NodeKind::Num) ? 0 : codes.at(c.kind()));
  }
  for (std::size_t i = 0; i < f.arity(); ++i) oracle_encode_into(f.child(i), codes, out);
}

inline std::vector<int> oracle_encode(const Formula& f, const std::map<NodeKind, int>& codes) {
  std::vector<int> out;
  oracle_encode_into(f, codes, out);
  return out;
}

inline std::size_t oracle_hamming(const std::vector<int>& a, const std::vector<int>& b, std::size_t length) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < length; ++i) {
    const int x = i < a.size() ? a[i] : 0;
    const int y = i < b.size() ? b[i] : 0;
    d += x != y;
  }
  return d;
}

}  // namespace formderiv::testkit
