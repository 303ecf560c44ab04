#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "framefinder/errors.hpp"

namespace framefinder::amr {

enum class NodeKind { concept_node, constant };

struct AmrNode {
  NodeKind kind = NodeKind::concept_node;
  std::string label;     // concept name or constant literal (quotes stripped)
  std::string variable;  // concepts only
  bool quoted = false;   // constants only

  friend bool operator==(const AmrNode&, const AmrNode&) = default;
};

struct AmrEdge {
  std::size_t source = 0;
  std::string role;  // ":ARG0", ":name", ...
  std::size_t target = 0;

  friend bool operator==(const AmrEdge&, const AmrEdge&) = default;
};

/// Rooted directed labelled graph for one document. Edges are stored in
/// parse order with inverse roles already normalized (x :R-of y becomes
/// y -:R-> x). The root stays the outermost variable even when
/// normalization gives it incoming edges.
struct AmrGraph {
  std::vector<AmrNode> nodes;
  std::vector<AmrEdge> edges;
  std::size_t root = 0;
  std::string doc_id;
  bool cyclic = false;

  std::size_t degree(std::size_t node) const {
    std::size_t d = 0;
    for (const auto& e : edges) {
      if (e.source == node) ++d;
      if (e.target == node) ++d;
    }
    return d;
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    for (const auto& e : edges) {
      ++d[e.source];
      ++d[e.target];
    }
    return d;
  }
};

inline bool is_inverse_role(std::string_view role) {
  // roles whose surface form ends in -of but are not inversions
  static constexpr std::string_view kPlain[] = {":consist-of", ":prep-out-of",
                                                ":prep-on-behalf-of"};
  if (role.size() <= 4 || !role.ends_with("-of")) return false;
  return std::find(std::begin(kPlain), std::end(kPlain), role) == std::end(kPlain);
}

inline std::string invert_role(std::string_view role) {
  if (is_inverse_role(role)) return std::string(role.substr(0, role.size() - 3));
  return std::string(role) + "-of";
}

/// True when `g` contains a directed cycle (self-loops included).
inline bool has_directed_cycle(const AmrGraph& g) {
  const std::size_t n = g.nodes.size();
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& e : g.edges) out[e.source].push_back(e.target);
  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  for (std::size_t start = 0; start < n; ++start) {
    if (state[start] != 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    state[start] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < out[v].size()) {
        const std::size_t w = out[v][next++];
        if (state[w] == 1) return true;
        if (state[w] == 0) {
          state[w] = 1;
          stack.push_back({w, 0});
        }
      } else {
        state[v] = 2;
        stack.pop_back();
      }
    }
  }
  return false;
}

namespace detail {

enum class Tok { lparen, rparen, slash, role, string, symbol, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::size_t pos = 0;
};

inline std::string_view describe(Tok t) {
  switch (t) {
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::slash: return "'/'";
    case Tok::role: return "role";
    case Tok::string: return "quoted string";
    case Tok::symbol: return "symbol";
    case Tok::end: return "end of input";
  }
  return "token";
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_blank();
    Token t;
    t.pos = pos_;
    if (pos_ >= text_.size()) return t;
    const char c = text_[pos_];
    if (c == '(') return single(Tok::lparen);
    if (c == ')') return single(Tok::rparen);
    if (c == '/') return single(Tok::slash);
    if (c == '"') return quoted();
    if (c == ':') {
      t.kind = Tok::role;
      t.text = take_symbol_chars(/*allow_colon=*/true);
      if (t.text.size() < 2) throw SyntaxError(t.pos, "role name after ':'");
      return t;
    }
    t.kind = Tok::symbol;
    t.text = take_symbol_chars(/*allow_colon=*/false);
    if (t.text.empty()) throw SyntaxError(t.pos, "symbol", text_.substr(pos_, 1));
    return t;
  }

 private:
  static bool delimiter(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '"' ||
           c == '/';
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        line_start_ = true;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#' && line_start_) {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    line_start_ = false;
  }

  Token single(Tok kind) {
    Token t{kind, std::string(1, text_[pos_]), pos_};
    ++pos_;
    return t;
  }

  std::string take_symbol_chars(bool allow_colon) {
    const std::size_t start = pos_;
    if (allow_colon) ++pos_;
    while (pos_ < text_.size() && !delimiter(text_[pos_]) && (text_[pos_] != ':' || !allow_colon)) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  Token quoted() {
    Token t{Tok::string, {}, pos_};
    ++pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (c == '"') return t;
      if (c == '\\' && pos_ < text_.size()) {
        t.text.push_back(text_[pos_++]);
      } else {
        t.text.push_back(c);
      }
    }
    throw SyntaxError(t.pos, "closing '\"' for string");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  bool line_start_ = true;
};

inline bool looks_like_variable(std::string_view s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin() + 1, s.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { advance(); }

  AmrGraph parse() {
    if (look_.kind != Tok::lparen) throw SyntaxError(look_.pos, "'('", look_.text);
    graph_.root = parse_node();
    if (look_.kind != Tok::end) throw SyntaxError(look_.pos, "end of input", look_.text);
    resolve();
    graph_.cyclic = has_directed_cycle(graph_);
    return std::move(graph_);
  }

 private:
  struct PendingEdge {
    std::size_t parent;
    std::string role;
    std::optional<std::size_t> target;  // resolved node
    std::string symbol;                 // unresolved bare symbol
    std::size_t pos = 0;
  };

  void advance() { look_ = lexer_.next(); }

  Token expect(Tok kind) {
    if (look_.kind != kind) throw SyntaxError(look_.pos, std::string(describe(kind)), look_.text);
    Token t = std::move(look_);
    advance();
    return t;
  }

  std::size_t parse_node() {
    expect(Tok::lparen);
    Token var = expect(Tok::symbol);
    if (look_.kind != Tok::slash) throw SyntaxError(look_.pos, "'/' after variable", look_.text);
    advance();
    Token concept_tok = look_;
    if (look_.kind != Tok::symbol && look_.kind != Tok::string) {
      throw SyntaxError(look_.pos, "concept", look_.text);
    }
    advance();

    if (const auto it = bound_.find(var.text); it != bound_.end()) {
      throw DuplicateConcept("variable '" + var.text + "' at offset " + std::to_string(var.pos) +
                             " is already bound to '" + graph_.nodes[it->second].label + "'");
    }
    const std::size_t id = graph_.nodes.size();
    graph_.nodes.push_back({NodeKind::concept_node, concept_tok.text, var.text, false});
    bound_.emplace(var.text, id);

    while (look_.kind == Tok::role) {
      Token role = std::move(look_);
      advance();
      PendingEdge edge{id, role.text, std::nullopt, {}, look_.pos};
      switch (look_.kind) {
        case Tok::lparen:
          edge.target = parse_node();
          break;
        case Tok::string: {
          edge.target = graph_.nodes.size();
          graph_.nodes.push_back({NodeKind::constant, look_.text, {}, true});
          advance();
          break;
        }
        case Tok::symbol:
          edge.symbol = look_.text;
          advance();
          break;
        default:
          throw SyntaxError(look_.pos, "value for role " + role.text, look_.text);
      }
      pending_.push_back(std::move(edge));
    }
    expect(Tok::rparen);
    return id;
  }

  void resolve() {
    for (auto& p : pending_) {
      if (!p.target) {
        if (const auto it = bound_.find(p.symbol); it != bound_.end()) {
          p.target = it->second;
        } else if (looks_like_variable(p.symbol)) {
          throw UnboundVariable("variable '" + p.symbol + "' at offset " + std::to_string(p.pos) +
                                " is never bound to a concept");
        } else {
          p.target = graph_.nodes.size();
          graph_.nodes.push_back({NodeKind::constant, p.symbol, {}, false});
        }
      }
    }
    // pending_ is in completion order of nested nodes; restore textual order
    std::stable_sort(pending_.begin(), pending_.end(),
                     [](const PendingEdge& a, const PendingEdge& b) { return a.pos < b.pos; });
    graph_.edges.reserve(pending_.size());
    for (auto& p : pending_) {
      if (is_inverse_role(p.role)) {
        graph_.edges.push_back({*p.target, invert_role(p.role), p.parent});
      } else {
        graph_.edges.push_back({p.parent, std::move(p.role), *p.target});
      }
    }
  }

  Lexer lexer_;
  Token look_;
  AmrGraph graph_;
  std::unordered_map<std::string, std::size_t> bound_;
  std::vector<PendingEdge> pending_;
};

}  // namespace detail

/// Parses a single PENMAN expression. Lines starting with '#' are comments.
/// Bare symbols resolve to variables when bound anywhere in the expression;
/// an unbound symbol shaped like a variable (a lowercase letter followed by
/// digits) is an error, any other bare symbol is a constant.
inline AmrGraph parse_penman(std::string_view text, std::string doc_id = {}) {
  AmrGraph g = detail::Parser(text).parse();
  g.doc_id = std::move(doc_id);
  return g;
}

namespace detail {

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string constant_text(const AmrNode& n) {
  return n.quoted ? quote(n.label) : n.label;
}

// Adjacency entry: edge index plus whether the node is the edge's source.
struct Incidence {
  std::size_t edge;
  bool outgoing;
};

inline std::vector<std::vector<Incidence>> incidence(const AmrGraph& g) {
  std::vector<std::vector<Incidence>> adj(g.nodes.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    adj[g.edges[i].source].push_back({i, true});
    if (g.edges[i].target != g.edges[i].source) adj[g.edges[i].target].push_back({i, false});
  }
  return adj;
}

inline std::vector<std::string> assign_variables(const AmrGraph& g) {
  std::vector<std::string> vars(g.nodes.size());
  std::unordered_map<std::string, int> used;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    if (n.kind == NodeKind::concept_node && !n.variable.empty() && used.emplace(n.variable, 0).second) {
      vars[i] = n.variable;
    }
  }
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    if (n.kind != NodeKind::concept_node || !vars[i].empty()) continue;
    char first = 'x';
    if (!n.label.empty() && std::isalpha(static_cast<unsigned char>(n.label[0]))) {
      first = static_cast<char>(std::tolower(static_cast<unsigned char>(n.label[0])));
    }
    for (int k = 2;; ++k) {
      std::string candidate = std::string(1, first) + std::to_string(k);
      if (used.emplace(candidate, 0).second) {
        vars[i] = candidate;
        break;
      }
    }
  }
  return vars;
}

}  // namespace detail

namespace detail {

// Chooses, for every edge, the node under which it is written. Nodes are
// expanded along outgoing edges first; a node reachable only against edge
// direction is attached through the earliest such edge as an inverse role.
struct Layout {
  std::vector<std::size_t> owner;      // per edge
  std::vector<bool> tree;              // per edge: expands its far endpoint
};

inline Layout plan_layout(const AmrGraph& g, const std::vector<std::vector<Incidence>>& adj) {
  Layout lay{std::vector<std::size_t>(g.edges.size()), std::vector<bool>(g.edges.size(), false)};
  for (std::size_t i = 0; i < g.edges.size(); ++i) lay.owner[i] = g.edges[i].source;
  std::vector<bool> seen(g.nodes.size(), false);
  std::vector<std::size_t> order;

  auto expand = [&](auto&& self, std::size_t u) -> void {
    seen[u] = true;
    order.push_back(u);
    for (const auto& inc : adj[u]) {
      if (!inc.outgoing) continue;
      const std::size_t v = g.edges[inc.edge].target;
      if (seen[v]) continue;
      lay.tree[inc.edge] = true;
      self(self, v);
    }
  };
  expand(expand, g.root);
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t i = 0; i < order.size() && !grew; ++i) {
      for (const auto& inc : adj[order[i]]) {
        const auto& e = g.edges[inc.edge];
        if (inc.outgoing || seen[e.source] || g.nodes[e.source].kind == NodeKind::constant) continue;
        lay.tree[inc.edge] = true;
        lay.owner[inc.edge] = order[i];
        expand(expand, e.source);
        grew = true;
        break;
      }
    }
  }
  return lay;
}

}  // namespace detail

/// Writes `g` in PENMAN notation starting from the root. Each node lists
/// its outgoing edges in stored order; an edge needed to reach an otherwise
/// unreachable node is written under its target with an inverse (-of)
/// role. Nodes already written are referenced by variable.
inline std::string serialize_penman(const AmrGraph& g, bool indent = true) {
  if (g.nodes.empty()) return {};
  if (g.nodes[g.root].kind == NodeKind::constant) {
    throw ConfigError("graph root must be a concept node");
  }
  const auto adj = detail::incidence(g);
  const auto vars = detail::assign_variables(g);
  const auto lay = detail::plan_layout(g, adj);
  std::string out;

  auto emit = [&](auto&& self, std::size_t u, std::size_t depth) -> void {
    const auto& node = g.nodes[u];
    out += '(';
    out += vars[u];
    out += " / ";
    out += node.label;
    for (const auto& inc : adj[u]) {
      if (lay.owner[inc.edge] != u) continue;
      const auto& e = g.edges[inc.edge];
      const bool forward = e.source == u;
      const std::size_t other = forward ? e.target : e.source;
      if (indent) {
        out += '\n';
        out.append(4 * (depth + 1), ' ');
      } else {
        out += ' ';
      }
      out += forward ? e.role : invert_role(e.role);
      out += ' ';
      const auto& on = g.nodes[other];
      if (on.kind == NodeKind::constant) {
        out += detail::constant_text(on);
      } else if (lay.tree[inc.edge]) {
        self(self, other, depth + 1);
      } else {
        out += vars[other];
      }
    }
    out += ')';
  };

  emit(emit, g.root, 0);
  return out;
}

namespace detail {

/// Colour refinement over the labelled graph; returns per-node ranks that
/// are invariant under isomorphism.
inline std::vector<std::size_t> refine_colors(const AmrGraph& g,
                                              const std::vector<std::vector<Incidence>>& adj) {
  const std::size_t n = g.nodes.size();
  std::vector<std::string> sig(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = g.nodes[i];
    sig[i] = node.kind == NodeKind::concept_node ? "C:" : (node.quoted ? "Q:" : "K:");
    sig[i] += node.label;
    if (i == g.root) sig[i] += "|R";
  }
  auto rank = [&](const std::vector<std::string>& s) {
    std::vector<std::string> uniq = s;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<std::size_t> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = static_cast<std::size_t>(std::lower_bound(uniq.begin(), uniq.end(), s[i]) - uniq.begin());
    }
    return std::make_pair(r, uniq.size());
  };
  auto [colors, classes] = rank(sig);
  for (std::size_t round = 0; round < n; ++round) {
    std::vector<std::string> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> parts;
      for (const auto& inc : adj[i]) {
        const auto& e = g.edges[inc.edge];
        const bool self_loop = e.source == e.target;
        const std::size_t other = inc.outgoing ? e.target : e.source;
        if (self_loop) {
          parts.push_back("L" + e.role);
        } else {
          parts.push_back((inc.outgoing ? ">" : "<") + e.role + "#" + std::to_string(colors[other]));
        }
      }
      std::sort(parts.begin(), parts.end());
      next[i] = std::to_string(colors[i]) + "[";
      for (const auto& p : parts) {
        next[i] += p;
        next[i] += ',';
      }
      next[i] += ']';
    }
    auto [refined, count] = rank(next);
    colors = std::move(refined);
    if (count == classes) break;
    classes = count;
  }
  return colors;
}

class CanonicalWalker {
 public:
  CanonicalWalker(const AmrGraph& g, const std::vector<std::vector<Incidence>>& adj,
                  const std::vector<std::size_t>& colors)
      : g_(g), adj_(adj), colors_(colors) {}

  // Runs one traversal. `choices` selects among tied edges at each decision
  // point in visiting order; radices of the decision points are recorded.
  std::string run(const std::vector<std::size_t>& choices, std::vector<std::size_t>& radices) {
    choices_ = &choices;
    radices_ = &radices;
    radices.clear();
    cursor_ = 0;
    order_.assign(g_.nodes.size(), kUnvisited);
    emitted_.assign(g_.edges.size(), false);
    next_index_ = 0;
    out_.clear();
    visit(g_.root);
    return out_;
  }

 private:
  static constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);

  struct Step {
    std::size_t edge;
    bool outgoing;
    std::string key;
  };

  std::string node_label(std::size_t v) const {
    const auto& n = g_.nodes[v];
    const char tag = n.kind == NodeKind::concept_node ? 'c' : (n.quoted ? 'q' : 'k');
    return tag + quote(n.label);
  }

  std::size_t choose(std::size_t radix) {
    radices_->push_back(radix);
    const std::size_t at = cursor_++;
    return at < choices_->size() ? (*choices_)[at] : 0;
  }

  void visit(std::size_t u) {
    order_[u] = next_index_++;
    out_ += '(';
    out_ += node_label(u);

    std::vector<Step> steps;
    for (const auto& inc : adj_[u]) {
      if (emitted_[inc.edge]) continue;
      const auto& e = g_.edges[inc.edge];
      const std::size_t other = inc.outgoing ? e.target : e.source;
      std::string key = (inc.outgoing ? "0" : "1") + e.role + "#" +
                        (other == u ? std::string("self") : std::to_string(colors_[other]));
      steps.push_back({inc.edge, inc.outgoing, std::move(key)});
    }
    std::stable_sort(steps.begin(), steps.end(),
                     [](const Step& a, const Step& b) { return a.key < b.key; });

    // resolve ties by explicit choices
    for (std::size_t i = 0; i < steps.size();) {
      std::size_t j = i + 1;
      while (j < steps.size() && steps[j].key == steps[i].key) ++j;
      for (std::size_t k = i; k + 1 < j; ++k) {
        const std::size_t pick = choose(j - k);
        std::swap(steps[k], steps[k + std::min(pick, j - k - 1)]);
      }
      i = j;
    }

    for (const auto& s : steps) {
      if (emitted_[s.edge]) continue;
      emitted_[s.edge] = true;
      const auto& e = g_.edges[s.edge];
      const std::size_t other = s.outgoing ? e.target : e.source;
      out_ += s.outgoing ? " " : " <";
      out_ += e.role;
      out_ += ' ';
      if (order_[other] != kUnvisited) {
        out_ += '#';
        out_ += std::to_string(order_[other]);
      } else {
        visit(other);
      }
    }
    out_ += ')';
  }

  const AmrGraph& g_;
  const std::vector<std::vector<Incidence>>& adj_;
  const std::vector<std::size_t>& colors_;
  const std::vector<std::size_t>* choices_ = nullptr;
  std::vector<std::size_t>* radices_ = nullptr;
  std::size_t cursor_ = 0;
  std::vector<std::size_t> order_;
  std::vector<bool> emitted_;
  std::size_t next_index_ = 0;
  std::string out_;
};

}  // namespace detail

/// Upper bound on tie-breaking traversals explored by canonical_form.
inline constexpr std::size_t kCanonicalSearchLimit = 50000;

/// Variable-independent description of a rooted labelled graph. Traversal
/// starts at the root; incident edges are ordered by direction, role and
/// the neighbour's refined colour. Remaining ties are resolved by taking
/// the lexicographically smallest traversal over all tie orders, so two
/// graphs get the same form exactly when they are isomorphic.
inline std::string canonical_form(const AmrGraph& g) {
  if (g.nodes.empty()) return "()";
  const auto adj = detail::incidence(g);
  const auto colors = detail::refine_colors(g, adj);
  detail::CanonicalWalker walker(g, adj, colors);

  std::vector<std::size_t> choices;
  std::vector<std::size_t> radices;
  std::string best = walker.run(choices, radices);
  std::size_t runs = 1;
  for (;;) {
    // odometer over the decision tree, last decision first
    choices.resize(radices.size(), 0);
    std::size_t pos = radices.size();
    while (pos > 0 && choices[pos - 1] + 1 >= radices[pos - 1]) --pos;
    if (pos == 0 || runs >= kCanonicalSearchLimit) break;
    ++choices[pos - 1];
    choices.resize(pos);
    std::string candidate = walker.run(choices, radices);
    ++runs;
    if (candidate < best) best = std::move(candidate);
  }
  return best;
}

/// One entry of an AMR file: metadata lines ("# ::key value") and the
/// PENMAN text that follows.
struct AmrBlock {
  std::string id;
  std::map<std::string, std::string> metadata;
  std::string penman;
  std::size_t line = 0;  // 1-based line of the block's first line
};

/// Splits AMR-file text into blocks separated by blank lines. Metadata
/// comes from "# ::key value" lines; other comment lines are dropped.
inline std::vector<AmrBlock> split_amr_blocks(std::string_view text) {
  std::vector<AmrBlock> blocks;
  AmrBlock current;
  bool open = false;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (open && (!current.penman.empty() || !current.id.empty())) blocks.push_back(std::move(current));
    current = AmrBlock{};
    open = false;
  };

  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;

    std::size_t b = 0;
    while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    const std::string_view body = line.substr(b);
    if (body.empty()) {
      flush();
    } else {
      if (!open) {
        open = true;
        current.line = line_no;
      }
      if (body.starts_with("#")) {
        if (body.starts_with("# ::")) {
          std::string_view rest = body.substr(4);
          const auto sp = rest.find_first_of(" \t");
          std::string key(rest.substr(0, sp));
          std::string value;
          if (sp != std::string_view::npos) {
            std::string_view v = rest.substr(sp + 1);
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
            value = std::string(v);
          }
          if (key == "id") current.id = value;
          current.metadata[key] = std::move(value);
        }
      } else {
        if (!current.penman.empty()) current.penman += '\n';
        current.penman += std::string(line);
      }
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  flush();
  return blocks;
}

}  // namespace framefinder::amr
