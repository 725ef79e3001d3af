#include "formderiv/formula.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <limits>

#include "formderiv/error.hpp"
#include "text_util.hpp"

namespace formderiv {

namespace {

constexpr std::size_t kVariadic = std::numeric_limits<std::size_t>::max();

struct KindInfo {
  NodeKind kind;
  std::string_view name;
  Arity arity;
};

constexpr std::array<KindInfo, kNodeKindCount> kKinds{{
    {NodeKind::Equal, "Equal", {2, 2}},
    {NodeKind::Plus, "Plus", {2, kVariadic}},
    {NodeKind::Minus, "Minus", {2, 2}},
    {NodeKind::Times, "Times", {2, kVariadic}},
    {NodeKind::Divide, "Divide", {2, 2}},
    {NodeKind::Power, "Power", {2, 2}},
    {NodeKind::Sqrt, "Sqrt", {1, 1}},
    {NodeKind::Integral, "Integral", {2, 2}},
    {NodeKind::Differential, "Der", {1, 1}},
    {NodeKind::DerivRatio, "DerivRatio", {2, 2}},
    {NodeKind::Sum, "Sum", {1, 1}},
    {NodeKind::Ln, "Ln", {1, 1}},
    {NodeKind::Exp, "Exp", {1, 1}},
    {NodeKind::Sin, "Sin", {1, 1}},
    {NodeKind::Cos, "Cos", {1, 1}},
    {NodeKind::FuncApply, "FuncApply", {0, kVariadic}},
    {NodeKind::Sym, "Sym", {0, 0}},
    {NodeKind::Num, "Num", {0, 0}},
}};

const KindInfo& info(NodeKind kind) noexcept { return kKinds[static_cast<std::size_t>(kind)]; }

std::string describe_arity(Arity a) {
  if (a.max == kVariadic) return "at least " + std::to_string(a.min);
  if (a.min == a.max) return "exactly " + std::to_string(a.min);
  return std::to_string(a.min) + ".." + std::to_string(a.max);
}

}  // namespace

Arity arity_of(NodeKind kind) noexcept { return info(kind).arity; }

std::string_view kind_name(NodeKind kind) noexcept { return info(kind).name; }

std::optional<NodeKind> kind_from_name(std::string_view name) noexcept {
  if (name == "Differential") return NodeKind::Differential;
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  return std::nullopt;
}

bool is_leaf_kind(NodeKind kind) noexcept { return kind == NodeKind::Sym || kind == NodeKind::Num; }

bool is_identifier(std::string_view text) noexcept {
  if (text.empty()) return false;
  auto head = static_cast<unsigned char>(text.front());
  if (!std::isalpha(head) && head != '_') return false;
  return std::all_of(text.begin() + 1, text.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

bool is_numeral(std::string_view text) noexcept {
  std::size_t i = 0;
  if (i < text.size() && text[i] == '-') ++i;
  auto digits = [&] {
    std::size_t start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    return i > start;
  };
  if (!digits()) return false;
  if (i < text.size() && text[i] == '.') {
    ++i;
    if (!digits()) return false;
  }
  return i == text.size();
}

// ---------------------------------------------------------------------------
// Formula

Formula Formula::create(NodeKind kind, std::string label, std::vector<Formula> children) {
  std::size_t size = 1;
  std::size_t depth = 0;
  for (const auto& c : children) {
    size += c.size();
    depth = std::max(depth, c.depth() + 1);
  }
  return Formula(std::make_shared<const Node>(Node{kind, std::move(label), std::move(children), size, depth}));
}

Formula Formula::sym(std::string name) {
  if (!is_identifier(name)) throw DomainError("invalid symbol name '" + name + "'");
  return create(NodeKind::Sym, std::move(name), {});
}

Formula Formula::num(std::string literal) {
  if (!is_numeral(literal)) throw DomainError("invalid numeral '" + literal + "'");
  return create(NodeKind::Num, std::move(literal), {});
}

Formula Formula::func(std::string name, std::vector<Formula> args) {
  if (!is_identifier(name)) throw DomainError("invalid function name '" + name + "'");
  return create(NodeKind::FuncApply, std::move(name), std::move(args));
}

Formula Formula::make(NodeKind kind, std::vector<Formula> children) {
  if (kind == NodeKind::Sym || kind == NodeKind::Num || kind == NodeKind::FuncApply) {
    throw ArityError(std::string(kind_name(kind)) + " nodes carry a label; use the dedicated factory");
  }
  const Arity a = arity_of(kind);
  if (children.size() < a.min || children.size() > a.max) {
    throw ArityError(std::string(kind_name(kind)) + " takes " + describe_arity(a) + " children, got " +
                     std::to_string(children.size()));
  }
  return create(kind, {}, std::move(children));
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.size() != b.size() || !a.same_head(b)) return false;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!(a.child(i) == b.child(i))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Paths

Path Path::child(std::size_t index) const {
  Path p = *this;
  p.steps.push_back(index);
  return p;
}

std::string to_string(const Path& path) {
  std::string out = "[";
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(path.steps[i]);
  }
  out += ']';
  return out;
}

Path parse_path(std::string_view text) {
  text = detail::trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw FormatError("path must look like [0,1,...]: '" + std::string(text) + "'");
  }
  Path p;
  std::string_view body = text.substr(1, text.size() - 2);
  if (detail::trim(body).empty()) return p;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = body.find(',', pos);
    std::string_view item =
        detail::trim(body.substr(pos, comma == std::string_view::npos ? body.size() - pos : comma - pos));
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty()) {
      throw FormatError("bad path component '" + std::string(item) + "'");
    }
    p.steps.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return p;
}

bool is_valid_path(const Formula& f, const Path& path) noexcept {
  const Formula* cur = &f;
  for (std::size_t step : path.steps) {
    if (step >= cur->arity()) return false;
    cur = &cur->children()[step];
  }
  return true;
}

const Formula& subtree_at(const Formula& f, const Path& path) {
  const Formula* cur = &f;
  for (std::size_t step : path.steps) {
    if (step >= cur->arity()) throw InvalidPath("path " + to_string(path) + " leaves the tree");
    cur = &cur->children()[step];
  }
  return *cur;
}

namespace {

Formula rebuild_with_children(const Formula& node, std::vector<Formula> children) {
  switch (node.kind()) {
    case NodeKind::FuncApply:
      return Formula::func(node.label(), std::move(children));
    case NodeKind::Sym:
    case NodeKind::Num:
      throw InvariantViolation("leaf nodes have no children to rebuild");
    default:
      return Formula::make(node.kind(), std::move(children));
  }
}

Formula replace_rec(const Formula& f, std::span<const std::size_t> steps, Formula& g) {
  if (steps.empty()) return std::move(g);
  std::vector<Formula> kids(f.children().begin(), f.children().end());
  kids[steps.front()] = replace_rec(kids[steps.front()], steps.subspan(1), g);
  return rebuild_with_children(f, std::move(kids));
}

void collect_paths(const Formula& f, Path& cur, std::vector<Path>& out) {
  out.push_back(cur);
  for (std::size_t i = 0; i < f.arity(); ++i) {
    cur.steps.push_back(i);
    collect_paths(f.child(i), cur, out);
    cur.steps.pop_back();
  }
}

void collect_symbols(const Formula& f, std::set<std::string>& out) {
  if (f.is_sym()) out.insert(f.label());
  for (const auto& c : f.children()) collect_symbols(c, out);
}

}  // namespace

Formula replace_at(const Formula& f, const Path& path, Formula g) {
  if (!is_valid_path(f, path)) throw InvalidPath("path " + to_string(path) + " leaves the tree");
  return replace_rec(f, path.steps, g);
}

std::vector<Path> all_paths(const Formula& f) {
  std::vector<Path> out;
  out.reserve(f.size());
  Path cur;
  collect_paths(f, cur, out);
  return out;
}

std::set<std::string> symbols_of(const Formula& f) {
  std::set<std::string> out;
  collect_symbols(f, out);
  return out;
}

bool contains_symbol(const Formula& f, std::string_view name) {
  if (f.is_sym() && f.label() == name) return true;
  return std::any_of(f.children().begin(), f.children().end(),
                     [&](const Formula& c) { return contains_symbol(c, name); });
}

// ---------------------------------------------------------------------------
// Printing

namespace {

void print_rec(const Formula& f, const std::set<std::string>* vars, std::string& out) {
  switch (f.kind()) {
    case NodeKind::Sym:
      if (vars && vars->count(f.label())) {
        out += '?';
        out += f.label();
      } else {
        out += "Sym(\"";
        out += f.label();
        out += "\")";
      }
      return;
    case NodeKind::Num:
      out += "Num(";
      out += f.label();
      out += ')';
      return;
    case NodeKind::FuncApply:
      out += "FuncApply(\"";
      out += f.label();
      out += '"';
      for (const auto& c : f.children()) {
        out += ',';
        print_rec(c, vars, out);
      }
      out += ')';
      return;
    default:
      out += kind_name(f.kind());
      out += '(';
      for (std::size_t i = 0; i < f.arity(); ++i) {
        if (i) out += ',';
        print_rec(f.child(i), vars, out);
      }
      out += ')';
  }
}

}  // namespace

std::string print(const Formula& f) {
  std::string out;
  print_rec(f, nullptr, out);
  return out;
}

std::string print_pattern(const Formula& f, const std::set<std::string>& vars) {
  std::string out;
  print_rec(f, &vars, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view text, bool allow_holes) : text_(text), allow_holes_(allow_holes) {}

  Formula parse_all() {
    Formula f = node();
    skip_ws();
    if (pos_ != text_.size()) fail("end of input");
    return f;
  }

  std::set<std::string> holes() && { return std::move(holes_); }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
    throw SyntaxError(pos_, expected, found);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("'") + c + "'");
    ++pos_;
  }

  std::string_view identifier() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    std::string_view id = text_.substr(start, pos_ - start);
    if (!is_identifier(id)) {
      pos_ = start;
      fail("identifier");
    }
    return id;
  }

  std::string quoted_name() {
    expect('"');
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') ++pos_;
    if (pos_ >= text_.size()) fail("closing '\"'");
    std::string name(text_.substr(start, pos_ - start));
    if (!is_identifier(name)) {
      pos_ = start;
      fail("name matching [A-Za-z_][A-Za-z0-9_]*");
    }
    ++pos_;
    return name;
  }

  std::string numeral() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '-' || text_[pos_] == '.')) {
      ++pos_;
    }
    std::string lit(text_.substr(start, pos_ - start));
    if (!is_numeral(lit)) {
      pos_ = start;
      fail("decimal literal");
    }
    return lit;
  }

  Formula hole() {
    ++pos_;  // '?'
    std::string name;
    if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      name = std::string(identifier());
    } else {
      name = "_h" + std::to_string(anonymous_++);
    }
    holes_.insert(name);
    return Formula::sym(name);
  }

  Formula node() {
    skip_ws();
    if (allow_holes_ && pos_ < text_.size() && text_[pos_] == '?') return hole();
    const std::size_t kind_pos = pos_;
    std::string_view name = identifier();
    auto kind = kind_from_name(name);
    if (!kind) throw UnknownKind("unknown node kind '" + std::string(name) + "' at offset " + std::to_string(kind_pos));
    expect('(');
    switch (*kind) {
      case NodeKind::Sym: {
        std::string n = quoted_name();
        expect(')');
        return Formula::sym(std::move(n));
      }
      case NodeKind::Num: {
        std::string lit = numeral();
        expect(')');
        return Formula::num(std::move(lit));
      }
      case NodeKind::FuncApply: {
        std::string n = quoted_name();
        std::vector<Formula> args;
        while (peek(',')) {
          ++pos_;
          args.push_back(node());
        }
        expect(')');
        return Formula::func(std::move(n), std::move(args));
      }
      default: {
        std::vector<Formula> kids;
        kids.push_back(node());
        while (peek(',')) {
          ++pos_;
          kids.push_back(node());
        }
        expect(')');
        return Formula::make(*kind, std::move(kids));
      }
    }
  }

  std::string_view text_;
  bool allow_holes_;
  std::size_t pos_ = 0;
  std::size_t anonymous_ = 0;
  std::set<std::string> holes_;
};

}  // namespace

Formula parse(std::string_view text) { return Parser(text, false).parse_all(); }

ParsedPattern parse_pattern(std::string_view text) {
  Parser p(text, true);
  Formula f = p.parse_all();
  return {std::move(f), std::move(p).holes()};
}

// ---------------------------------------------------------------------------

namespace build {

Formula Sym(std::string name) { return Formula::sym(std::move(name)); }
Formula Num(std::string literal) { return Formula::num(std::move(literal)); }
Formula Num(long long value) { return Formula::num(std::to_string(value)); }

}  // namespace build

}  // namespace formderiv
