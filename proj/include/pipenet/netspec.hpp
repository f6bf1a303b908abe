#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pipenet/analysis.hpp"
#include "pipenet/composites.hpp"
#include "pipenet/core.hpp"
#include "pipenet/friction.hpp"
#include "pipenet/interconnect.hpp"
#include "pipenet/steady_state.hpp"

namespace pipenet {

struct Diagnostic {
  int line = 0;
  int column = 0;
  std::string message;

  std::string str() const {
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
  }
};

class ParseError : public ConfigError {
 public:
  explicit ParseError(std::vector<Diagnostic> diagnostics)
      : ConfigError(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  static std::string join(const std::vector<Diagnostic>& ds) {
    std::string s;
    for (const auto& d : ds) {
      if (!s.empty()) s += '\n';
      s += d.str();
    }
    return s;
  }
  std::vector<Diagnostic> diagnostics_;
};

enum class ElementKind { pipe, gain, joint, branch, series };

/// One `pipe`, `gain`, `joint`, `branch` or `series` statement.
struct ElementDecl {
  ElementKind kind = ElementKind::pipe;
  std::string id;
  PipeParams params;                ///< pipe
  std::optional<double> reynolds;   ///< pipe
  double k = 1.0;                   ///< gain
  /// joint: [feeder1, feeder2, outlet]; branch: [inlet, outlet1, outlet2]; series: run order.
  std::vector<std::string> members;
  int line = 0;

  bool operator==(const ElementDecl& o) const {
    return kind == o.kind && id == o.id && params == o.params && reynolds == o.reynolds && k == o.k &&
           members == o.members;
  }
};

struct NominalDecl {
  std::string target;  ///< pipe id or "*"
  double p_l = 0.0;
  double q = 0.0;
  std::optional<double> T_l, T_r;
  int line = 0;

  bool operator==(const NominalDecl& o) const {
    return target == o.target && p_l == o.p_l && q == o.q && T_l == o.T_l && T_r == o.T_r;
  }
};

struct PortRef {
  std::string element;
  std::string port;
  std::string str() const { return element + "." + port; }
  bool operator==(const PortRef&) const = default;
};

struct LinkDecl {
  PortRef right, left;
  int line = 0;
  bool operator==(const LinkDecl& o) const { return right == o.right && left == o.left; }
};

struct InputDecl {
  std::string name;
  PortRef port;
  int line = 0;
  bool operator==(const InputDecl& o) const { return name == o.name && port == o.port; }
};

struct OutputDecl {
  std::string name;
  SignalLabel signal;
  int line = 0;
  bool operator==(const OutputDecl& o) const { return name == o.name && signal == o.signal; }
};

/// Parsed network description. Declaration order of `elements` fixes state order.
struct NetworkSpec {
  GasProperties gas;
  std::vector<ElementDecl> elements;  ///< pipes and composites, as declared
  std::vector<NominalDecl> nominals;
  std::vector<LinkDecl> links;
  std::vector<InputDecl> inputs;
  std::vector<OutputDecl> outputs;

  bool operator==(const NetworkSpec&) const = default;

  const ElementDecl* find(std::string_view id) const {
    for (const auto& e : elements)
      if (e.id == id) return &e;
    return nullptr;
  }
  ElementDecl* find(std::string_view id) {
    for (auto& e : elements)
      if (e.id == id) return &e;
    return nullptr;
  }

  /// Composite that absorbs pipe `id`, or nullptr.
  const ElementDecl* owner(std::string_view id) const {
    for (const auto& e : elements)
      if (e.kind != ElementKind::pipe && e.kind != ElementKind::gain &&
          std::ranges::find(e.members, id) != e.members.end())
        return &e;
    return nullptr;
  }

  /// Elements that become blocks of the stacked system: composites, gains and
  /// pipes not absorbed by a composite, in declaration order.
  std::vector<const ElementDecl*> network_elements() const {
    std::vector<const ElementDecl*> out;
    for (const auto& e : elements)
      if (e.kind != ElementKind::pipe || owner(e.id) == nullptr) out.push_back(&e);
    return out;
  }

  std::vector<std::string> pipe_ids() const {
    std::vector<std::string> out;
    for (const auto& e : elements)
      if (e.kind == ElementKind::pipe) out.push_back(e.id);
    return out;
  }
};

inline const char* keyword(ElementKind kind) {
  switch (kind) {
    case ElementKind::pipe: return "pipe";
    case ElementKind::gain: return "gain";
    case ElementKind::joint: return "joint";
    case ElementKind::branch: return "branch";
    case ElementKind::series: return "series";
  }
  return "?";
}

/// Resolves `port` of a network element to the signal pair it exposes.
inline std::optional<Port> resolve_port(const ElementDecl& e, std::string_view port) {
  const std::string name(port);
  switch (e.kind) {
    case ElementKind::pipe:
    case ElementKind::gain:
      if (port == "l") return left_port(name, e.id);
      if (port == "r") return right_port(name, e.id);
      break;
    case ElementKind::joint:
      if (port == "l1") return left_port(name, e.members[0]);
      if (port == "l2") return left_port(name, e.members[1]);
      if (port == "r") return right_port(name, e.members[2]);
      break;
    case ElementKind::branch:
      if (port == "l") return left_port(name, e.members[0]);
      if (port == "r1") return right_port(name, e.members[1]);
      if (port == "r2") return right_port(name, e.members[2]);
      break;
    case ElementKind::series:
      if (port == "l") return left_port(name, e.members.front());
      if (port == "r") return right_port(name, e.members.back());
      break;
  }
  return std::nullopt;
}

inline std::vector<std::string> port_names(ElementKind kind) {
  switch (kind) {
    case ElementKind::joint: return {"l1", "l2", "r"};
    case ElementKind::branch: return {"l", "r1", "r2"};
    default: return {"l", "r"};
  }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace detail::netspec {

struct Token {
  enum class Kind { word, equals, open, close, comma } kind;
  std::string text;
  int column;
};

struct LineError {
  int column;
  std::string message;
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  const auto special = [](char c) { return c == '=' || c == '[' || c == ']' || c == ','; };
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    const int col = static_cast<int>(i) + 1;
    if (special(c)) {
      const auto kind = c == '=' ? Token::Kind::equals
                        : c == '[' ? Token::Kind::open
                        : c == ']' ? Token::Kind::close
                                   : Token::Kind::comma;
      out.push_back({kind, std::string(1, c), col});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && !special(line[j]) && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' &&
           line[j] != '#')
      ++j;
    out.push_back({Token::Kind::word, std::string(line.substr(i, j - i)), col});
    i = j;
  }
  return out;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::ranges::all_of(s, [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

struct Value {
  bool is_list = false;
  std::string scalar;
  std::vector<std::string> list;
  int column = 0;
};

class LineParser {
 public:
  LineParser(std::vector<Token> tokens, int end_column) : tokens_(std::move(tokens)), end_column_(end_column) {}

  bool done() const { return pos_ >= tokens_.size(); }
  int column() const { return done() ? end_column_ : tokens_[pos_].column; }

  const Token& word(const char* what) {
    if (done() || tokens_[pos_].kind != Token::Kind::word) throw LineError{column(), std::string("expected ") + what};
    return tokens_[pos_++];
  }

  std::string identifier(const char* what) {
    const Token& t = word(what);
    if (!is_identifier(t.text)) throw LineError{t.column, std::string("invalid ") + what + " '" + t.text + "'"};
    return t.text;
  }

  void expect(Token::Kind kind, const char* what) {
    if (done() || tokens_[pos_].kind != kind) throw LineError{column(), std::string("expected '") + what + "'"};
    ++pos_;
  }

  void finish() {
    if (!done()) throw LineError{column(), "unexpected '" + tokens_[pos_].text + "'"};
  }

  /// key=value pairs up to end of line; values are words or [w, w, ...].
  std::map<std::string, Value> pairs(const std::set<std::string>& allowed) {
    std::map<std::string, Value> out;
    while (!done()) {
      const Token& key = word("key=value");
      if (!allowed.contains(key.text)) throw LineError{key.column, "unknown key '" + key.text + "'"};
      if (out.contains(key.text)) throw LineError{key.column, "duplicate key '" + key.text + "'"};
      expect(Token::Kind::equals, "=");
      Value v;
      v.column = column();
      if (!done() && tokens_[pos_].kind == Token::Kind::open) {
        ++pos_;
        v.is_list = true;
        for (;;) {
          v.list.push_back(identifier("identifier"));
          if (!done() && tokens_[pos_].kind == Token::Kind::comma) {
            ++pos_;
            continue;
          }
          expect(Token::Kind::close, "]");
          break;
        }
      } else {
        v.scalar = word("value").text;
      }
      out.emplace(key.text, std::move(v));
    }
    return out;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int end_column_;
};

inline double to_number(const Value& v, const std::string& key) {
  if (v.is_list) throw LineError{v.column, key + " expects a number"};
  double out = 0.0;
  const char* first = v.scalar.data();
  const char* last = first + v.scalar.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out))
    throw LineError{v.column, key + ": not a number '" + v.scalar + "'"};
  return out;
}

inline double required(const std::map<std::string, Value>& kv, const std::string& key, int column) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw LineError{column, "missing " + key + "="};
  return to_number(it->second, key);
}

inline std::optional<double> optional_number(const std::map<std::string, Value>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) return std::nullopt;
  return to_number(it->second, key);
}

inline std::string scalar_id(const std::map<std::string, Value>& kv, const std::string& key, int column) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw LineError{column, "missing " + key + "="};
  if (it->second.is_list || !is_identifier(it->second.scalar))
    throw LineError{it->second.column, key + " expects a single identifier"};
  return it->second.scalar;
}

inline std::vector<std::string> list_ids(const std::map<std::string, Value>& kv, const std::string& key, int column,
                                         std::optional<std::size_t> count) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw LineError{column, "missing " + key + "="};
  if (!it->second.is_list) throw LineError{it->second.column, key + " expects a list [a,b,...]"};
  if (count && it->second.list.size() != *count)
    throw LineError{it->second.column, key + " expects exactly " + std::to_string(*count) + " entries"};
  return it->second.list;
}

inline PortRef port_ref(const Token& t) {
  const auto dot = t.text.find('.');
  if (dot == std::string::npos || t.text.find('.', dot + 1) != std::string::npos)
    throw LineError{t.column, "expected <element>.<port>, got '" + t.text + "'"};
  PortRef ref{t.text.substr(0, dot), t.text.substr(dot + 1)};
  if (!is_identifier(ref.element) || ref.port.empty()) throw LineError{t.column, "malformed port '" + t.text + "'"};
  return ref;
}


inline void check_semantics(const NetworkSpec& spec, std::vector<Diagnostic>& diags) {
  const auto report = [&](int line, int col, std::string msg) { diags.push_back({line, col, std::move(msg)}); };

  std::map<std::string, int> seen;
  for (const auto& e : spec.elements) {
    if (!seen.emplace(e.id, e.line).second) report(e.line, 1, "duplicate element id '" + e.id + "'");
  }

  std::map<std::string, std::string> consumed;
  for (const auto& e : spec.elements) {
    if (e.kind == ElementKind::pipe || e.kind == ElementKind::gain) continue;
    std::set<std::string> local;
    for (const auto& m : e.members) {
      const ElementDecl* target = spec.find(m);
      if (!target) {
        report(e.line, 1, std::string(keyword(e.kind)) + " " + e.id + ": unknown pipe '" + m + "'");
        continue;
      }
      if (target->kind != ElementKind::pipe) {
        report(e.line, 1, std::string(keyword(e.kind)) + " " + e.id + ": '" + m + "' is not a pipe");
        continue;
      }
      if (!local.insert(m).second) report(e.line, 1, e.id + ": pipe '" + m + "' listed twice");
      const auto [it, fresh] = consumed.emplace(m, e.id);
      if (!fresh && it->second != e.id)
        report(e.line, 1, "pipe '" + m + "' already belongs to " + it->second);
    }
  }

  std::set<std::string> nominal_targets;
  for (const auto& n : spec.nominals) {
    if (!nominal_targets.insert(n.target).second) report(n.line, 1, "duplicate nominal for '" + n.target + "'");
    if (n.target != "*") {
      const ElementDecl* e = spec.find(n.target);
      if (!e || e->kind != ElementKind::pipe) report(n.line, 1, "nominal for unknown pipe '" + n.target + "'");
    }
  }

  std::set<std::string> used_ports;
  // Returns the resolved port or records a diagnostic.
  const auto check_port = [&](const PortRef& ref, int line) -> std::optional<Port> {
    const ElementDecl* e = spec.find(ref.element);
    if (!e) {
      report(line, 1, "unknown element '" + ref.element + "'");
      return std::nullopt;
    }
    if (e->kind == ElementKind::pipe) {
      if (const auto it = consumed.find(e->id); it != consumed.end()) {
        report(line, 1, "pipe '" + e->id + "' belongs to " + it->second + " and cannot be connected directly");
        return std::nullopt;
      }
    }
    auto port = resolve_port(*e, ref.port);
    if (!port) {
      report(line, 1, "element '" + ref.element + "' has no port '" + ref.port + "'");
      return std::nullopt;
    }
    if (!used_ports.insert(ref.str()).second) report(line, 1, "port " + ref.str() + " already connected");
    return port;
  };

  for (const auto& link : spec.links) {
    const auto r = check_port(link.right, link.line);
    const auto l = check_port(link.left, link.line);
    if (r && l && (r->flange != Side::right || l->flange != Side::left))
      report(link.line, 1, "incompatible flanges: " + link.right.str() + " and " + link.left.str() +
                               " (right flange first, left flange second)");
  }

  std::set<std::string> names;
  for (const auto& in : spec.inputs) {
    if (!names.insert(in.name).second) report(in.line, 1, "duplicate input name '" + in.name + "'");
    check_port(in.port, in.line);
  }
  std::set<std::string> out_names;
  for (const auto& out : spec.outputs)
    if (!out_names.insert(out.name).second) report(out.line, 1, "duplicate output name '" + out.name + "'");
}

}  // namespace detail::netspec

/// Parses a network description. Throws ParseError with every diagnostic found.
inline NetworkSpec parse_netspec(std::string_view text) {
  using namespace detail::netspec;
  NetworkSpec spec;
  std::vector<Diagnostic> diags;
  bool have_gas = false;
  int lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const std::string_view raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    auto tokens = tokenize(raw);
    if (tokens.empty()) continue;
    LineParser p(std::move(tokens), static_cast<int>(raw.size()) + 1);
    try {
      const Token& kw = p.word("statement");
      const int kcol = kw.column;
      const std::string k = kw.text;
      if (k == "gas") {
        if (have_gas) throw LineError{kcol, "duplicate gas block"};
        const auto kv = p.pairs({"Rs", "z0", "T0", "cv", "Tamb"});
        GasProperties g;
        g.R_s = required(kv, "Rs", kcol);
        g.z_0 = required(kv, "z0", kcol);
        g.T_0 = required(kv, "T0", kcol);
        g.c_v = optional_number(kv, "cv");
        g.T_amb = optional_number(kv, "Tamb").value_or(g.T_0);
        try {
          g.validate();
        } catch (const ConfigError& e) {
          throw LineError{kcol, e.what()};
        }
        spec.gas = g;
        have_gas = true;
      } else if (k == "pipe") {
        ElementDecl e;
        e.kind = ElementKind::pipe;
        e.id = p.identifier("pipe id");
        const auto kv = p.pairs({"L", "d", "dout", "eps", "dh", "lambda", "Re", "krad"});
        e.params.length = required(kv, "L", kcol);
        e.params.diameter = required(kv, "d", kcol);
        e.params.outer_diameter = optional_number(kv, "dout").value_or(0.0);
        e.params.roughness = optional_number(kv, "eps").value_or(0.0);
        e.params.elevation_change = optional_number(kv, "dh").value_or(0.0);
        e.params.friction = optional_number(kv, "lambda");
        e.params.k_rad = optional_number(kv, "krad").value_or(0.0);
        e.reynolds = optional_number(kv, "Re");
        if (!e.params.friction && !e.reynolds) throw LineError{kcol, "pipe " + e.id + " needs lambda= or Re="};
        try {
          e.params.validate();
        } catch (const ConfigError& err) {
          throw LineError{kcol, err.what()};
        }
        e.line = lineno;
        spec.elements.push_back(std::move(e));
      } else if (k == "gain") {
        ElementDecl e;
        e.kind = ElementKind::gain;
        e.id = p.identifier("gain id");
        const auto kv = p.pairs({"k"});
        e.k = required(kv, "k", kcol);
        if (e.k == 0.0) throw LineError{kv.at("k").column, "gain k must be nonzero"};
        e.line = lineno;
        spec.elements.push_back(std::move(e));
      } else if (k == "joint") {
        ElementDecl e;
        e.kind = ElementKind::joint;
        e.id = p.identifier("joint id");
        const auto kv = p.pairs({"feeds", "into"});
        e.members = list_ids(kv, "feeds", kcol, 2);
        e.members.push_back(scalar_id(kv, "into", kcol));
        e.line = lineno;
        spec.elements.push_back(std::move(e));
      } else if (k == "branch") {
        ElementDecl e;
        e.kind = ElementKind::branch;
        e.id = p.identifier("branch id");
        const auto kv = p.pairs({"from", "into"});
        e.members = {scalar_id(kv, "from", kcol)};
        const auto outs = list_ids(kv, "into", kcol, 2);
        e.members.insert(e.members.end(), outs.begin(), outs.end());
        e.line = lineno;
        spec.elements.push_back(std::move(e));
      } else if (k == "series") {
        ElementDecl e;
        e.kind = ElementKind::series;
        e.id = p.identifier("series id");
        const auto kv = p.pairs({"pipes"});
        e.members = list_ids(kv, "pipes", kcol, std::nullopt);
        e.line = lineno;
        spec.elements.push_back(std::move(e));
      } else if (k == "nominal") {
        NominalDecl n;
        const Token& target = p.word("pipe id or *");
        if (target.text != "*" && !is_identifier(target.text))
          throw LineError{target.column, "invalid nominal target '" + target.text + "'"};
        n.target = target.text;
        const auto kv = p.pairs({"pl", "q", "Tl", "Tr"});
        n.p_l = required(kv, "pl", kcol);
        n.q = required(kv, "q", kcol);
        n.T_l = optional_number(kv, "Tl");
        n.T_r = optional_number(kv, "Tr");
        if (!(n.p_l > 0.0)) throw LineError{kv.at("pl").column, "pl must be > 0"};
        if ((n.T_l && !(*n.T_l > 0.0)) || (n.T_r && !(*n.T_r > 0.0)))
          throw LineError{kcol, "temperatures must be > 0"};
        n.line = lineno;
        spec.nominals.push_back(std::move(n));
      } else if (k == "link") {
        LinkDecl l;
        l.right = port_ref(p.word("<element>.<port>"));
        l.left = port_ref(p.word("<element>.<port>"));
        p.finish();
        l.line = lineno;
        spec.links.push_back(std::move(l));
      } else if (k == "input") {
        InputDecl in;
        in.name = p.identifier("input name");
        p.expect(Token::Kind::equals, "=");
        in.port = port_ref(p.word("<element>.<port>"));
        p.finish();
        in.line = lineno;
        spec.inputs.push_back(std::move(in));
      } else if (k == "output") {
        OutputDecl out;
        out.name = p.identifier("output name");
        p.expect(Token::Kind::equals, "=");
        const Token& sig = p.word("signal label");
        try {
          out.signal = SignalLabel::parse(sig.text);
        } catch (const ConfigError& e) {
          throw LineError{sig.column, e.what()};
        }
        p.finish();
        out.line = lineno;
        spec.outputs.push_back(std::move(out));
      } else {
        throw LineError{kcol, "unknown statement '" + k + "'"};
      }
    } catch (const LineError& e) {
      diags.push_back({lineno, e.column, e.message});
    }
  }
  if (!have_gas) diags.insert(diags.begin(), {1, 1, "no gas block"});
  if (diags.empty()) check_semantics(spec, diags);
  if (!diags.empty()) throw ParseError(std::move(diags));
  return spec;
}

// ---------------------------------------------------------------------------
// Canonical rendering
// ---------------------------------------------------------------------------

namespace detail::netspec {

/// Shortest decimal text that reads back to the same double.
inline std::string exact(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string join_ids(const std::vector<std::string>& ids) {
  std::string s = "[";
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? "," : "") + ids[i];
  return s + "]";
}

}  // namespace detail::netspec

inline std::string render(const NetworkSpec& spec) {
  using detail::netspec::exact;
  using detail::netspec::join_ids;
  std::ostringstream os;
  const auto& g = spec.gas;
  os << "gas Rs=" << exact(g.R_s) << " z0=" << exact(g.z_0) << " T0=" << exact(g.T_0);
  if (g.c_v) os << " cv=" << exact(*g.c_v);
  os << " Tamb=" << exact(g.T_amb) << '\n';
  for (const auto& e : spec.elements) {
    os << keyword(e.kind) << ' ' << e.id;
    switch (e.kind) {
      case ElementKind::pipe: {
        const auto& pp = e.params;
        os << " L=" << exact(pp.length) << " d=" << exact(pp.diameter);
        if (pp.outer_diameter != 0.0) os << " dout=" << exact(pp.outer_diameter);
        if (pp.roughness != 0.0) os << " eps=" << exact(pp.roughness);
        if (pp.elevation_change != 0.0) os << " dh=" << exact(pp.elevation_change);
        if (pp.friction) os << " lambda=" << exact(*pp.friction);
        if (e.reynolds) os << " Re=" << exact(*e.reynolds);
        if (pp.k_rad != 0.0) os << " krad=" << exact(pp.k_rad);
        break;
      }
      case ElementKind::gain: os << " k=" << exact(e.k); break;
      case ElementKind::joint:
        os << " feeds=" << join_ids({e.members[0], e.members[1]}) << " into=" << e.members[2];
        break;
      case ElementKind::branch:
        os << " from=" << e.members[0] << " into=" << join_ids({e.members[1], e.members[2]});
        break;
      case ElementKind::series: os << " pipes=" << join_ids(e.members); break;
    }
    os << '\n';
  }
  for (const auto& n : spec.nominals) {
    os << "nominal " << n.target << " pl=" << exact(n.p_l) << " q=" << exact(n.q);
    if (n.T_l) os << " Tl=" << exact(*n.T_l);
    if (n.T_r) os << " Tr=" << exact(*n.T_r);
    os << '\n';
  }
  for (const auto& l : spec.links) os << "link " << l.right.str() << ' ' << l.left.str() << '\n';
  for (const auto& in : spec.inputs) os << "input " << in.name << " = " << in.port.str() << '\n';
  for (const auto& out : spec.outputs) os << "output " << out.name << " = " << out.signal.str() << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Elaboration
// ---------------------------------------------------------------------------

/// Resolved pipe: friction factor filled in and nominal point solved.
struct ResolvedPipe {
  MemberPipe pipe;
  bool explicit_nominal = false;
};

struct ElaboratedNetwork {
  std::vector<CompositeModel> elements;  ///< stacked blocks, declaration order
  StackedSystem stacked;
  ConnectionMatrices connection;
  std::vector<ResolvedPipe> pipes;       ///< every declared pipe, declaration order
  std::vector<std::string> warnings;
  std::vector<OutputDecl> outputs;

  const ResolvedPipe& pipe(std::string_view id) const {
    for (const auto& p : pipes)
      if (p.pipe.id == id) return p;
    throw ConfigError("unknown pipe " + std::string(id));
  }
};

namespace detail::netspec {

inline const NominalDecl* nominal_for(const NetworkSpec& spec, const std::string& id) {
  const NominalDecl* fallback = nullptr;
  for (const auto& n : spec.nominals) {
    if (n.target == id) return &n;
    if (n.target == "*") fallback = &n;
  }
  return fallback;
}

inline OperatingPoint solve_nominal(const PipeParams& params, const GasProperties& gas, double p_l, double q,
                                    double T_l, double T_r) {
  OperatingPoint op;
  op.p_l = p_l;
  op.q = q;
  op.T_l = T_l;
  op.T_r = T_r;
  op.p_r = exact_nominal_pr(p_l, q, T_l, T_r, params, gas);
  return op;
}

}  // namespace detail::netspec

inline ElaboratedNetwork elaborate(const NetworkSpec& spec) {
  using namespace detail::netspec;
  const GasProperties& gas = spec.gas;
  gas.validate();
  ElaboratedNetwork net;
  net.outputs = spec.outputs;

  // Pipes chained inside a series without their own nominal follow their predecessor.
  std::map<std::string, std::string> chained_from;
  for (const auto& e : spec.elements)
    if (e.kind == ElementKind::series)
      for (std::size_t i = 1; i < e.members.size(); ++i) chained_from[e.members[i]] = e.members[i - 1];

  std::map<std::string, std::size_t> index;
  const auto resolve = [&](const ElementDecl& e, auto&& self) -> const ResolvedPipe& {
    if (const auto it = index.find(e.id); it != index.end()) return net.pipes[it->second];
    ResolvedPipe r;
    r.pipe.id = e.id;
    r.pipe.params = resolve_lambda(e.params, e.reynolds);
    const NominalDecl* own = nullptr;
    for (const auto& n : spec.nominals)
      if (n.target == e.id) own = &n;
    r.explicit_nominal = own != nullptr;
    const auto chain = chained_from.find(e.id);
    if (!own && chain != chained_from.end()) {
      const ResolvedPipe& prev = self(*spec.find(chain->second), self);
      const NominalDecl* d = nominal_for(spec, e.id);
      const double T_r = d && d->T_r ? *d->T_r : gas.T_0;
      r.pipe.op = solve_nominal(r.pipe.params, gas, prev.pipe.op.p_r, prev.pipe.op.q, prev.pipe.op.T_r, T_r);
    } else {
      const NominalDecl* d = own ? own : nominal_for(spec, e.id);
      if (!d) throw ConfigError("pipe " + e.id + " has no nominal point");
      r.pipe.op = solve_nominal(r.pipe.params, gas, d->p_l, d->q, d->T_l.value_or(gas.T_0), d->T_r.value_or(gas.T_0));
    }
    for (const auto& w : validate_regime(r.pipe.params, r.pipe.op, gas)) net.warnings.push_back(e.id + ": " + w.message);
    index[e.id] = net.pipes.size();
    net.pipes.push_back(std::move(r));
    return net.pipes.back();
  };
  for (const auto& e : spec.elements)
    if (e.kind == ElementKind::pipe) resolve(e, resolve);
  std::ranges::stable_sort(net.pipes, [&](const ResolvedPipe& a, const ResolvedPipe& b) {
    return spec.find(a.pipe.id)->line < spec.find(b.pipe.id)->line;
  });

  const auto member = [&](const std::string& id) -> const ResolvedPipe& { return net.pipe(id); };
  const auto policy = [&](const ElementDecl& e) {
    const bool all_explicit = std::ranges::all_of(e.members, [&](const std::string& id) {
      return member(id).explicit_nominal || chained_from.contains(id);
    });
    return all_explicit ? NominalCheck::strict : NominalCheck::lenient;
  };

  for (const ElementDecl* e : spec.network_elements()) {
    switch (e->kind) {
      case ElementKind::pipe: net.elements.push_back(make_pipe(member(e->id).pipe, gas)); break;
      case ElementKind::gain: net.elements.push_back(make_gain(e->id, e->k)); break;
      case ElementKind::joint:
        net.elements.push_back(make_joint(member(e->members[2]).pipe, member(e->members[0]).pipe,
                                          member(e->members[1]).pipe, gas, policy(*e)));
        break;
      case ElementKind::branch:
        net.elements.push_back(make_branch(member(e->members[0]).pipe, member(e->members[1]).pipe,
                                           member(e->members[2]).pipe, gas, policy(*e)));
        break;
      case ElementKind::series: {
        std::vector<MemberPipe> run;
        for (const auto& id : e->members) run.push_back(member(id).pipe);
        net.elements.push_back(make_series(run, gas, policy(*e)));
        break;
      }
    }
    for (const auto& w : net.elements.back().warnings) net.warnings.push_back(e->id + ": " + w);
  }

  std::vector<NamedModel> parts;
  const auto blocks = spec.network_elements();
  for (std::size_t i = 0; i < blocks.size(); ++i) parts.push_back({blocks[i]->id, &net.elements[i].model});
  net.stacked = stack(parts);

  std::vector<PortLink> links;
  for (const auto& l : spec.links)
    links.push_back({*resolve_port(*spec.find(l.right.element), l.right.port),
                     *resolve_port(*spec.find(l.left.element), l.left.port)});
  std::vector<ExternalInput> externals;
  for (const auto& in : spec.inputs)
    externals.push_back({in.name, resolve_port(*spec.find(in.port.element), in.port.port)->input});
  net.connection = build_FG(net.stacked, links, externals);
  return net;
}

/// Closed network model, restricted to the declared outputs when any are given.
inline StateSpaceModel closed_model(const ElaboratedNetwork& net) {
  StateSpaceModel closed = close(net.stacked, net.connection);
  if (net.outputs.empty()) return closed;
  std::vector<SignalLabel> keep;
  for (const auto& o : net.outputs) keep.push_back(o.signal);
  return select_outputs(closed, keep);
}

inline NetworkSpec with_gain(NetworkSpec spec, const std::string& gain_id, double k) {
  ElementDecl* e = spec.find(gain_id);
  if (!e || e->kind != ElementKind::gain) throw ConfigError("no gain element '" + gain_id + "'");
  if (k == 0.0 || !std::isfinite(k)) throw ConfigError("gain k must be finite and nonzero");
  e->k = k;
  return spec;
}

/// Rebuilds and closes the network for every k of gain element `gain_id`.
inline std::vector<double> stability_margin_sweep(const NetworkSpec& spec, const std::string& gain_id,
                                                  const std::vector<double>& ks) {
  with_gain(spec, gain_id, 1.0);  // fail early on a bad id
  return stability_margin_sweep(
      [&](double k) {
        const ElaboratedNetwork net = elaborate(with_gain(spec, gain_id, k));
        return close(net.stacked, net.connection);
      },
      ks);
}

}  // namespace pipenet
