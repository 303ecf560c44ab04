#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <gtest/gtest.h>

#include "framefinder/amr.hpp"
#include "framefinder/corpus.hpp"

namespace ff = framefinder;
using ff::amr::AmrGraph;
using ff::amr::NodeKind;

namespace {

std::vector<ff::amr::AmrBlock> handcrafted() {
  return ff::amr::split_amr_blocks(ff::read_file(std::string(FRAMEFINDER_TEST_DATA) + "/handcrafted.amr"));
}

std::size_t count_concepts(const AmrGraph& g) {
  return std::count_if(g.nodes.begin(), g.nodes.end(),
                       [](const auto& n) { return n.kind == NodeKind::concept_node; });
}

using NodeSig = std::tuple<NodeKind, std::string, bool>;

NodeSig signature(const ff::amr::AmrNode& n) { return {n.kind, n.label, n.quoted}; }

// Brute-force rooted labelled-graph isomorphism over all node permutations.
bool isomorphic(const AmrGraph& a, const AmrGraph& b) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
  const std::size_t n = a.nodes.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::tuple<std::size_t, std::string, std::size_t>> eb;
  for (const auto& e : b.edges) eb.emplace_back(e.source, e.role, e.target);
  std::sort(eb.begin(), eb.end());
  do {
    if (perm[a.root] != b.root) continue;
    bool labels_ok = true;
    for (std::size_t i = 0; i < n && labels_ok; ++i) {
      labels_ok = signature(a.nodes[i]) == signature(b.nodes[perm[i]]);
    }
    if (!labels_ok) continue;
    std::vector<std::tuple<std::size_t, std::string, std::size_t>> ea;
    for (const auto& e : a.edges) ea.emplace_back(perm[e.source], e.role, perm[e.target]);
    std::sort(ea.begin(), ea.end());
    if (ea == eb) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// Random connected rooted graph: a spanning tree (edges pointing either way)
// plus a few extra re-entrant edges. Small label/role alphabets force ties.
AmrGraph random_graph(std::mt19937& rng, std::size_t max_nodes) {
  AmrGraph g;
  const std::size_t n = 1 + rng() % max_nodes;
  const char* labels[] = {"a", "b"};
  const char* roles[] = {":r", ":s"};
  for (std::size_t i = 0; i < n; ++i) {
    const bool constant = i > 0 && rng() % 4 == 0;
    if (constant) {
      const bool quoted = rng() % 2 == 0;
      g.nodes.push_back({NodeKind::constant, quoted ? labels[rng() % 2] : (rng() % 2 ? "-" : "7"), {}, quoted});
    } else {
      g.nodes.push_back({NodeKind::concept_node, labels[rng() % 2], "v" + std::to_string(i), false});
    }
  }
  g.root = 0;
  std::vector<std::size_t> concepts = {0};
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t parent = concepts[rng() % concepts.size()];
    const char* role = roles[rng() % 2];
    if (g.nodes[i].kind == NodeKind::constant || rng() % 3 != 0) {
      g.edges.push_back({parent, role, i});
    } else {
      g.edges.push_back({i, role, parent});
    }
    if (g.nodes[i].kind == NodeKind::concept_node) concepts.push_back(i);
  }
  const std::size_t extra = rng() % 3;
  for (std::size_t k = 0; k < extra && concepts.size() > 1; ++k) {
    const std::size_t s = concepts[rng() % concepts.size()];
    const std::size_t t = concepts[rng() % concepts.size()];
    if (s == t) continue;
    g.edges.push_back({s, roles[rng() % 2], t});
  }
  std::shuffle(g.edges.begin(), g.edges.end(), rng);
  g.cyclic = ff::amr::has_directed_cycle(g);
  return g;
}

AmrGraph permuted(const AmrGraph& g, std::mt19937& rng) {
  std::vector<std::size_t> perm(g.nodes.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  AmrGraph out;
  out.nodes.resize(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    out.nodes[perm[i]] = g.nodes[i];
    if (out.nodes[perm[i]].kind == NodeKind::concept_node) {
      out.nodes[perm[i]].variable = "w" + std::to_string(perm[i]);
    }
  }
  for (const auto& e : g.edges) out.edges.push_back({perm[e.source], e.role, perm[e.target]});
  std::shuffle(out.edges.begin(), out.edges.end(), rng);
  out.root = perm[g.root];
  return out;
}

void mutate(AmrGraph& g, std::mt19937& rng) {
  switch (rng() % 3) {
    case 0:
      if (!g.edges.empty()) {
        auto& r = g.edges[rng() % g.edges.size()].role;
        r = r == ":r" ? ":s" : ":r";
        return;
      }
      [[fallthrough]];
    case 1: {
      auto& n = g.nodes[rng() % g.nodes.size()];
      n.label = n.label == "a" ? "b" : "a";
      return;
    }
    default:
      if (!g.edges.empty()) {
        auto& e = g.edges[rng() % g.edges.size()];
        if (g.nodes[e.source].kind == NodeKind::concept_node &&
            g.nodes[e.target].kind == NodeKind::concept_node) {
          std::swap(e.source, e.target);
          return;
        }
      }
      g.nodes[0].label = g.nodes[0].label + "x";
  }
}

}  // namespace

TEST(ParsePenman, MinimalGraph) {
  const auto g = ff::amr::parse_penman("(w / want-01)");
  ASSERT_EQ(g.nodes.size(), 1u);
  EXPECT_TRUE(g.edges.empty());
  EXPECT_EQ(g.nodes[g.root].variable, "w");
  EXPECT_EQ(g.nodes[g.root].label, "want-01");
}

TEST(ParsePenman, Reentrancy) {
  const auto g = ff::amr::parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
  EXPECT_EQ(g.nodes.size(), 3u);
  EXPECT_EQ(count_concepts(g), 3u);
  ASSERT_EQ(g.edges.size(), 3u);
  std::size_t boy = 0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].label == "boy") boy = i;
  }
  std::size_t in_degree = 0;
  for (const auto& e : g.edges) in_degree += e.target == boy;
  EXPECT_EQ(in_degree, 2u);
  EXPECT_FALSE(g.cyclic);
  // stored in textual order
  EXPECT_EQ(g.edges[0].role, ":ARG0");
  EXPECT_EQ(g.edges[1].role, ":ARG1");
  EXPECT_EQ(g.nodes[g.edges[2].source].label, "go-02");
}

TEST(ParsePenman, NameSubgraphWithQuotedConstant) {
  const auto g = ff::amr::parse_penman("(p / person :name (n / name :op1 \"Smith\"))");
  ASSERT_EQ(g.nodes.size(), 3u);
  const auto it = std::find_if(g.nodes.begin(), g.nodes.end(),
                               [](const auto& n) { return n.kind == NodeKind::constant; });
  ASSERT_NE(it, g.nodes.end());
  EXPECT_EQ(it->label, "Smith");
  EXPECT_TRUE(it->quoted);
  EXPECT_TRUE(it->variable.empty());
  const auto idx = static_cast<std::size_t>(it - g.nodes.begin());
  const auto& e = g.edges.back();
  EXPECT_EQ(e.role, ":op1");
  EXPECT_EQ(e.target, idx);
  EXPECT_EQ(g.nodes[e.source].label, "name");
}

TEST(ParsePenman, BareConstants) {
  const auto g = ff::amr::parse_penman("(d / die-01 :polarity - :ARG1 (p / person :quant 3) :mode expressive)");
  std::vector<std::string> constants;
  for (const auto& n : g.nodes) {
    if (n.kind == NodeKind::constant) {
      constants.push_back(n.label);
      EXPECT_FALSE(n.quoted);
    }
  }
  EXPECT_EQ(constants, (std::vector<std::string>{"-", "3", "expressive"}));
}

TEST(ParsePenman, ConstantsArePerOccurrence) {
  const auto g = ff::amr::parse_penman("(a / and :op1 \"X\" :op2 \"X\")");
  EXPECT_EQ(g.nodes.size(), 3u);
}

TEST(ParsePenman, InverseRoleNormalization) {
  const auto inv = ff::amr::parse_penman("(a / alpha :R-of (b / beta))");
  const auto fwd = ff::amr::parse_penman("(b / beta :R (a / alpha))");
  ASSERT_EQ(inv.edges.size(), 1u);
  const auto& e = inv.edges[0];
  EXPECT_EQ(inv.nodes[e.source].label, "beta");
  EXPECT_EQ(e.role, ":R");
  EXPECT_EQ(inv.nodes[e.target].label, "alpha");
  // root stays the outermost variable
  EXPECT_EQ(inv.nodes[inv.root].label, "alpha");

  auto edge_set = [](const AmrGraph& g) {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& x : g.edges) out.emplace_back(g.nodes[x.source].label, x.role, g.nodes[x.target].label);
    std::sort(out.begin(), out.end());
    return out;
  };
  auto node_set = [](const AmrGraph& g) {
    std::vector<std::string> out;
    for (const auto& n : g.nodes) out.push_back(n.label);
    std::sort(out.begin(), out.end());
    return out;
  };
  EXPECT_EQ(edge_set(inv), edge_set(fwd));
  EXPECT_EQ(node_set(inv), node_set(fwd));
}

TEST(ParsePenman, ConsistOfIsNotInverted) {
  const auto g = ff::amr::parse_penman("(c / consist-01 :consist-of (v / volunteer))");
  EXPECT_EQ(g.edges[0].role, ":consist-of");
  EXPECT_EQ(g.nodes[g.edges[0].source].label, "consist-01");
  const auto inv = ff::amr::parse_penman("(v / volunteer :consist-of-of (c / consist-01))");
  EXPECT_EQ(inv.edges[0].role, ":consist-of");
  EXPECT_EQ(inv.nodes[inv.edges[0].source].label, "consist-01");
}

TEST(ParsePenman, SkipsCommentLines) {
  const auto g = ff::amr::parse_penman("# ::id x\n# ::snt hello\n(h / hello\n# inline note\n  :ARG0 (w / world))");
  EXPECT_EQ(g.nodes.size(), 2u);
}

TEST(ParsePenman, CompactSlashForm) {
  const auto g = ff::amr::parse_penman("(w/want-01 :ARG0(b/boy))");
  EXPECT_EQ(g.nodes.size(), 2u);
}

TEST(ParsePenman, CycleIsFlaggedNotRejected) {
  const auto g = ff::amr::parse_penman("(a / alpha :ARG0 (b / beta :ARG1 a))");
  EXPECT_TRUE(g.cyclic);
  const auto self = ff::amr::parse_penman("(s / shoot-02 :ARG0 s)");
  EXPECT_TRUE(self.cyclic);
  EXPECT_FALSE(ff::amr::parse_penman("(s / shoot-02 :ARG0 (h / he) :ARG1 h)").cyclic);
}

TEST(ParsePenman, NodeCountIsVariablesPlusConstantOccurrences) {
  for (const auto& block : handcrafted()) {
    const auto g = ff::amr::parse_penman(block.penman);
    std::size_t variables = 0, constants = 0;
    for (const auto& n : g.nodes) (n.kind == NodeKind::concept_node ? variables : constants)++;
    EXPECT_EQ(g.nodes.size(), variables + constants);
    std::vector<std::string> vars;
    for (const auto& n : g.nodes) {
      if (n.kind == NodeKind::concept_node) vars.push_back(n.variable);
    }
    std::sort(vars.begin(), vars.end());
    EXPECT_EQ(std::unique(vars.begin(), vars.end()), vars.end()) << block.id;
  }
}

struct MalformedCase {
  const char* text;
  std::size_t position;
};

TEST(ParsePenman, SyntaxErrorsCarryPositions) {
  const MalformedCase cases[] = {
      {"(w / want-01", 12},           // unbalanced
      {"(w want-01)", 3},             // missing '/'
      {"(w / want-01))", 13},         // trailing ')'
      {"(w / want-01 :ARG0)", 18},    // role without value
      {"w / want-01", 0},             // no '('
      {"", 0},                        // empty
      {"(w / )", 5},                  // missing concept
      {"(w / a :ARG0 \"open", 13},    // unterminated string
      {"(w / a : (b / c))", 7},       // bare colon
      {"(w / a) (b / c)", 8},         // two expressions
  };
  for (const auto& c : cases) {
    try {
      (void)ff::amr::parse_penman(c.text);
      ADD_FAILURE() << "no error for: " << c.text;
    } catch (const ff::SyntaxError& e) {
      EXPECT_EQ(e.position(), c.position) << c.text << " -> " << e.what();
      EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
    }
  }
}

TEST(ParsePenman, BindingErrors) {
  EXPECT_THROW(ff::amr::parse_penman("(w / a :ARG0 (w / b))"), ff::DuplicateConcept);
  EXPECT_THROW(ff::amr::parse_penman("(w / a :ARG0 (b / b) :ARG1 (b / c))"), ff::DuplicateConcept);
  EXPECT_THROW(ff::amr::parse_penman("(w / a :ARG0 x)"), ff::UnboundVariable);
  EXPECT_THROW(ff::amr::parse_penman("(w / a :ARG0 x2)"), ff::UnboundVariable);
  try {
    (void)ff::amr::parse_penman("(w / a :ARG0 x)");
  } catch (const ff::UnboundVariable& e) {
    EXPECT_NE(std::string(e.what()).find("offset 13"), std::string::npos) << e.what();
  }
  // forward references resolve
  EXPECT_NO_THROW(ff::amr::parse_penman("(w / a :ARG0 b :ARG1 (b / boy))"));
}

TEST(SerializePenman, SingleNode) {
  EXPECT_EQ(ff::amr::serialize_penman(ff::amr::parse_penman("(w / want-01)")), "(w / want-01)");
}

TEST(SerializePenman, Layout) {
  const auto g = ff::amr::parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
  EXPECT_EQ(ff::amr::serialize_penman(g, false), "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
  EXPECT_EQ(ff::amr::serialize_penman(g),
            "(w / want-01\n    :ARG0 (b / boy)\n    :ARG1 (g / go-02\n        :ARG0 b))");
}

TEST(SerializePenman, WritesInverseRolesAndEscapes) {
  const auto g = ff::amr::parse_penman("(p / person :ARG0-of (s / shoot-02) :name (n / name :op1 \"A \\\"B\\\"\"))");
  const auto text = ff::amr::serialize_penman(g, false);
  EXPECT_EQ(text, "(p / person :ARG0-of (s / shoot-02) :name (n / name :op1 \"A \\\"B\\\"\"))");
}

TEST(SerializePenman, GeneratesMissingVariables) {
  AmrGraph g;
  g.nodes = {{NodeKind::concept_node, "want-01", "", false}, {NodeKind::concept_node, "boy", "", false}};
  g.edges = {{0, ":ARG0", 1}};
  const auto text = ff::amr::serialize_penman(g, false);
  EXPECT_EQ(text, "(w2 / want-01 :ARG0 (b2 / boy))");
  EXPECT_EQ(ff::amr::canonical_form(ff::amr::parse_penman(text)), ff::amr::canonical_form(g));
}

TEST(CanonicalForm, VariableRenamingInvariant) {
  const auto a = ff::amr::parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
  const auto b = ff::amr::parse_penman("(x1 / want-01 :ARG1 (y / go-02 :ARG0 (z / boy)) :ARG0 z)");
  EXPECT_EQ(ff::amr::canonical_form(a), ff::amr::canonical_form(b));
}

TEST(CanonicalForm, RoleLabelMatters) {
  const auto a = ff::amr::parse_penman("(w / want-01 :ARG0 (b / boy))");
  const auto b = ff::amr::parse_penman("(w / want-01 :ARG1 (b / boy))");
  EXPECT_NE(ff::amr::canonical_form(a), ff::amr::canonical_form(b));
}

TEST(CanonicalForm, ReentrancyDiffersFromDuplicatedSubtree) {
  const auto shared = ff::amr::parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
  const auto copied = ff::amr::parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 (b2 / boy)))");
  EXPECT_NE(ff::amr::canonical_form(shared), ff::amr::canonical_form(copied));
  EXPECT_FALSE(isomorphic(shared, copied));
}

TEST(CanonicalForm, QuotedAndBareConstantsDiffer) {
  EXPECT_NE(ff::amr::canonical_form(ff::amr::parse_penman("(q / quant :op1 3)")),
            ff::amr::canonical_form(ff::amr::parse_penman("(q / quant :op1 \"3\")")));
}

TEST(CanonicalForm, RootMatters) {
  EXPECT_NE(ff::amr::canonical_form(ff::amr::parse_penman("(a / alpha :R-of (b / beta))")),
            ff::amr::canonical_form(ff::amr::parse_penman("(b / beta :R (a / alpha))")));
}

TEST(CanonicalForm, AgreesWithBruteForceIsomorphism) {
  std::mt19937 rng(20240601);
  std::size_t iso_pairs = 0, non_iso_pairs = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const auto a = random_graph(rng, 6);
    AmrGraph b = permuted(a, rng);
    if (trial % 2 == 1) mutate(b, rng);
    const bool expect = isomorphic(a, b);
    (expect ? iso_pairs : non_iso_pairs)++;
    EXPECT_EQ(ff::amr::canonical_form(a) == ff::amr::canonical_form(b), expect)
        << ff::amr::serialize_penman(a, false) << " vs " << ff::amr::serialize_penman(b, false);
  }
  EXPECT_GT(iso_pairs, 1000u);
  EXPECT_GT(non_iso_pairs, 500u);
}

TEST(CanonicalForm, IndependentRandomPairsAgreeWithBruteForce) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 3000; ++trial) {
    const auto a = random_graph(rng, 5);
    const auto b = random_graph(rng, 5);
    EXPECT_EQ(ff::amr::canonical_form(a) == ff::amr::canonical_form(b), isomorphic(a, b));
  }
}

TEST(RoundTrip, HandcraftedCorpus) {
  const auto blocks = handcrafted();
  ASSERT_GE(blocks.size(), 50u);
  for (const auto& block : blocks) {
    const auto g = ff::amr::parse_penman(block.penman, block.id);
    const auto canon = ff::amr::canonical_form(g);
    for (bool indent : {true, false}) {
      const auto text = ff::amr::serialize_penman(g, indent);
      const auto again = ff::amr::parse_penman(text);
      EXPECT_EQ(ff::amr::canonical_form(again), canon) << block.id << "\n" << text;
      EXPECT_EQ(ff::amr::serialize_penman(again, indent), text) << block.id;
    }
  }
}

TEST(RoundTrip, RandomGraphs) {
  std::mt19937 rng(4242);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto g = random_graph(rng, 8);
    const auto text = ff::amr::serialize_penman(g, trial % 2 == 0);
    const auto again = ff::amr::parse_penman(text);
    EXPECT_EQ(ff::amr::canonical_form(again), ff::amr::canonical_form(g)) << text;
  }
}

TEST(AmrBlocks, SplitsOnBlankLinesAndReadsMetadata) {
  const auto blocks = ff::amr::split_amr_blocks(
      "# header comment\n\n# ::id d1\n# ::snt Hello there\n(h / hello)\n\n\n# ::id d2\n(w / world\n   :mod (b / big))\n");
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].id, "d1");
  EXPECT_EQ(blocks[0].metadata.at("snt"), "Hello there");
  EXPECT_EQ(blocks[0].penman, "(h / hello)");
  EXPECT_EQ(blocks[0].line, 3u);
  EXPECT_EQ(blocks[1].id, "d2");
  EXPECT_EQ(blocks[1].penman, "(w / world\n   :mod (b / big))");
}
