#include "sctree/parsimony.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "sctree/error.hpp"
#include "sctree/text.hpp"

namespace sctree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_score(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::size_t leaf_position(const std::vector<std::string>& leaves, const std::string& language,
                          const std::string& what) {
  auto it = std::lower_bound(leaves.begin(), leaves.end(), language);
  if (it == leaves.end() || *it != language) {
    throw Error(what + ": language '" + language + "' has data but is not a tree leaf");
  }
  return static_cast<std::size_t>(it - leaves.begin());
}

detail::BoundSankoff bind_character(const SankoffCharacter& c, const std::vector<std::string>& leaves,
                          RootMode root) {
  const std::string what = "character " + std::to_string(c.id);
  if (c.languages.size() != c.observed.size()) throw Error(what + ": languages and reflexes differ in length");
  detail::BoundSankoff b;
  b.states = c.matrix.size();
  b.cost = c.matrix.cost;
  if (b.cost.size() != b.states * b.states) throw Error(what + ": malformed transition matrix");
  if (root == RootMode::Fixed) {
    b.root = c.matrix.index_of(c.root_state);
    if (!b.root) throw Error(what + ": root state '" + c.root_state + "' is not a matrix state");
  }
  b.leaf_state.assign(leaves.size(), std::nullopt);
  for (std::size_t i = 0; i < c.languages.size(); ++i) {
    if (!c.observed[i]) continue;
    const auto pos = leaf_position(leaves, c.languages[i], what);
    const auto s = c.matrix.index_of(*c.observed[i]);
    if (!s) {
      throw Error(what + ": language '" + c.languages[i] + "' reflex '" + *c.observed[i] +
                  "' is not a state of the transition matrix");
    }
    b.leaf_state[pos] = *s;
  }
  return b;
}

detail::BoundBinary bind_character(const BinaryCharacter& c, const std::vector<std::string>& leaves) {
  const std::string what = "character " + c.id;
  if (c.languages.size() != c.values.size()) throw Error(what + ": languages and values differ in length");
  detail::BoundBinary b;
  b.leaf_set.assign(leaves.size(), 0b11);
  for (std::size_t i = 0; i < c.languages.size(); ++i) {
    if (!c.values[i]) continue;
    b.leaf_set[leaf_position(leaves, c.languages[i], what)] = *c.values[i] ? 0b10 : 0b01;
  }
  return b;
}

double score_sankoff(const RootedTree& tree, const std::vector<int>& leaf_of,
                     const detail::BoundSankoff& c) {
  const std::size_t S = c.states;
  std::vector<double> dp(tree.nodes().size() * S, 0.0);
  for (int v : tree.postorder()) {
    double* mine = &dp[static_cast<std::size_t>(v) * S];
    const auto& node = tree.node(v);
    if (node.is_leaf()) {
      const auto& s = c.leaf_state[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(v)])];
      if (s) {
        for (std::size_t k = 0; k < S; ++k) mine[k] = k == *s ? 0.0 : kInf;
      }
      continue;
    }
    for (int child : node.children) {
      const double* theirs = &dp[static_cast<std::size_t>(child) * S];
      for (std::size_t from = 0; from < S; ++from) {
        double best = kInf;
        const double* row = &c.cost[from * S];
        for (std::size_t to = 0; to < S; ++to) best = std::min(best, row[to] + theirs[to]);
        mine[from] += best;
      }
    }
  }
  const double* root = &dp[static_cast<std::size_t>(tree.root()) * S];
  if (c.root) return root[*c.root];
  return *std::min_element(root, root + S);
}

// Hartigan's generalization of Fitch to polytomies; root state free.
int score_binary(const RootedTree& tree, const std::vector<int>& leaf_of, const detail::BoundBinary& c) {
  std::vector<std::uint8_t> set(tree.nodes().size(), 0);
  int changes = 0;
  for (int v : tree.postorder()) {
    const auto& node = tree.node(v);
    if (node.is_leaf()) {
      set[static_cast<std::size_t>(v)] = c.leaf_set[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(v)])];
      continue;
    }
    int count[2] = {0, 0};
    for (int child : node.children) {
      const auto s = set[static_cast<std::size_t>(child)];
      count[0] += s & 1;
      count[1] += (s >> 1) & 1;
    }
    const int top = std::max(count[0], count[1]);
    changes += static_cast<int>(node.children.size()) - top;
    set[static_cast<std::size_t>(v)] =
        static_cast<std::uint8_t>((count[0] == top ? 1 : 0) | (count[1] == top ? 2 : 0));
  }
  return changes;
}

std::vector<int> leaf_map(const RootedTree& tree) {
  std::vector<int> leaf_of(tree.nodes().size(), -1);
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) leaf_of[static_cast<std::size_t>(tree.leaf_node(i))] = static_cast<int>(i);
  return leaf_of;
}

std::vector<std::string> sorted_unique(std::vector<std::string> leaves) {
  std::sort(leaves.begin(), leaves.end());
  if (std::adjacent_find(leaves.begin(), leaves.end()) != leaves.end()) {
    throw Error("duplicate leaf label");
  }
  return leaves;
}

}  // namespace

SankoffCharacter make_sankoff_character(const Correspondence& corr,
                                        const std::vector<std::string>& languages,
                                        TransitionMatrix matrix) {
  if (languages.size() != corr.reflexes.size()) {
    throw Error("correspondence " + std::to_string(corr.id) + ": language count mismatch");
  }
  SankoffCharacter c;
  c.id = corr.id;
  c.matrix = std::move(matrix);
  c.root_state = corr.proto;
  c.languages = languages;
  c.observed = corr.reflexes;
  return c;
}

ParsimonyScorer::ParsimonyScorer(std::span<const Character> characters, std::vector<std::string> leaves,
                                 RootMode sankoff_root)
    : leaves_(sorted_unique(std::move(leaves))) {
  for (const auto& ch : characters) {
    if (const auto* s = std::get_if<SankoffCharacter>(&ch)) {
      sankoff_.push_back(bind_character(*s, leaves_, sankoff_root));
    } else {
      binary_.push_back(bind_character(std::get<BinaryCharacter>(ch), leaves_));
    }
  }
}

double ParsimonyScorer::score(const RootedTree& tree) const {
  if (tree.labels() != leaves_) throw Error("tree leaves do not match the character data");
  const auto leaf_of = leaf_map(tree);
  double total = 0.0;
  for (const auto& c : sankoff_) total += score_sankoff(tree, leaf_of, c);
  for (const auto& c : binary_) total += score_binary(tree, leaf_of, c);
  return total;
}

double sankoff_score(const RootedTree& tree, const SankoffCharacter& character, RootMode root) {
  const auto bound = bind_character(character, tree.labels(), root);
  return score_sankoff(tree, leaf_map(tree), bound);
}

int binary_parsimony_score(const RootedTree& tree, const BinaryCharacter& character) {
  const auto bound = bind_character(character, tree.labels());
  return score_binary(tree, leaf_map(tree), bound);
}

double tree_score(const RootedTree& tree, std::span<const Character> characters) {
  if (characters.empty()) throw Error("no characters to score");
  return ParsimonyScorer(characters, tree.labels()).score(tree);
}

void write_binary_matrix(std::ostream& out, const BinaryMatrix& matrix) {
  out << "character";
  for (const auto& l : matrix.languages) out << '\t' << l;
  out << '\n';
  for (const auto& c : matrix.characters) {
    out << c.id;
    for (const auto& l : matrix.languages) {
      std::optional<bool> v;
      for (std::size_t i = 0; i < c.languages.size(); ++i) {
        if (c.languages[i] == l) v = c.values[i];
      }
      out << '\t' << (v ? (*v ? "1" : "0") : "-");
    }
    out << '\n';
  }
}

BinaryMatrix read_binary_matrix(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  const std::string src = path.string();
  BinaryMatrix m;
  bool header = false;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cells = split(lines[i], '\t');
    if (!header) {
      if (cells.size() < 2) throw ParseError(src, i + 1, "expected header character<TAB><languages...>");
      for (std::size_t k = 1; k < cells.size(); ++k) m.languages.emplace_back(trim(cells[k]));
      header = true;
      continue;
    }
    if (cells.size() != m.languages.size() + 1) throw ParseError(src, i + 1, "wrong number of cells");
    BinaryCharacter c;
    c.id = std::string(trim(cells[0]));
    if (!ids.insert(c.id).second) throw ParseError(src, i + 1, "duplicate character id '" + c.id + "'");
    c.languages = m.languages;
    for (std::size_t k = 1; k < cells.size(); ++k) {
      const auto v = trim(cells[k]);
      if (v == "0") c.values.emplace_back(false);
      else if (v == "1") c.values.emplace_back(true);
      else if (v == "-") c.values.emplace_back(std::nullopt);
      else throw ParseError(src, i + 1, "cell must be 0, 1 or -");
    }
    m.characters.push_back(std::move(c));
  }
  if (!header) throw ParseError(src, 0, "empty binary matrix");
  return m;
}

RootedTree nni_neighbor(const RootedTree& tree, Rng& rng) {
  auto nodes = tree.nodes();
  std::vector<int> inner;
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v].parent >= 0 && !nodes[v].is_leaf()) inner.push_back(static_cast<int>(v));
  }
  if (inner.empty()) return tree;
  const int v = inner[rng.below(inner.size())];
  auto& vn = nodes[static_cast<std::size_t>(v)];
  auto& pn = nodes[static_cast<std::size_t>(vn.parent)];
  std::vector<int> siblings;
  for (int s : pn.children) {
    if (s != v) siblings.push_back(s);
  }
  const int s = siblings[rng.below(siblings.size())];
  const int c = vn.children[rng.below(vn.children.size())];
  std::replace(vn.children.begin(), vn.children.end(), c, s);
  std::replace(pn.children.begin(), pn.children.end(), s, c);
  nodes[static_cast<std::size_t>(s)].parent = v;
  nodes[static_cast<std::size_t>(c)].parent = vn.parent;
  return RootedTree::from_nodes(std::move(nodes), tree.root());
}

RootedTree spr_neighbor(const RootedTree& tree, Rng& rng) {
  auto nodes = tree.nodes();
  int root = tree.root();
  std::vector<int> movable;
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v].parent >= 0) movable.push_back(static_cast<int>(v));
  }
  if (movable.empty()) return tree;
  const int x = movable[rng.below(movable.size())];
  const int p = nodes[static_cast<std::size_t>(x)].parent;
  auto& pk = nodes[static_cast<std::size_t>(p)].children;
  pk.erase(std::find(pk.begin(), pk.end(), x));
  nodes[static_cast<std::size_t>(x)].parent = -1;
  int sibling = -1;
  if (pk.size() == 1) {
    sibling = pk.front();
    const int g = nodes[static_cast<std::size_t>(p)].parent;
    nodes[static_cast<std::size_t>(sibling)].parent = g;
    if (g < 0) {
      root = sibling;
    } else {
      auto& gk = nodes[static_cast<std::size_t>(g)].children;
      std::replace(gk.begin(), gk.end(), p, sibling);
    }
    pk.clear();
    nodes[static_cast<std::size_t>(p)].parent = -1;
  }
  std::vector<int> targets;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (v != sibling) targets.push_back(v);
    for (int c : nodes[static_cast<std::size_t>(v)].children) stack.push_back(c);
  }
  if (targets.empty()) targets.push_back(sibling);
  std::sort(targets.begin(), targets.end());
  const int y = targets[rng.below(targets.size())];
  const int joint = static_cast<int>(nodes.size());
  const int yp = nodes[static_cast<std::size_t>(y)].parent;
  nodes.push_back(TreeNode{yp, {y, x}, {}});
  nodes[static_cast<std::size_t>(y)].parent = joint;
  nodes[static_cast<std::size_t>(x)].parent = joint;
  if (yp < 0) {
    root = joint;
  } else {
    auto& yk = nodes[static_cast<std::size_t>(yp)].children;
    std::replace(yk.begin(), yk.end(), y, joint);
  }
  return RootedTree::from_nodes(std::move(nodes), root);
}

SearchResult genetic_search(std::span<const Character> characters, std::vector<std::string> leaves,
                            const SearchParams& params, std::ostream* log) {
  if (characters.empty()) throw Error("search needs at least one character");
  leaves = sorted_unique(std::move(leaves));
  if (leaves.size() < 4) throw Error("search needs at least 4 leaves");
  if (params.population == 0 || params.elite == 0 || params.elite > params.population) {
    throw Error("elite count must lie in [1, population]");
  }
  if (params.budget < params.population) throw Error("budget is smaller than the population");
  if (!(params.exploration >= 0.0 && params.exploration <= 1.0)) {
    throw Error("exploration fraction must lie in [0, 1]");
  }
  const ParsimonyScorer scorer(characters, leaves);
  Rng rng(params.seed);
  SearchResult result;
  result.seed = params.seed;

  std::unordered_map<std::string, double> cache;
  std::map<std::string, RootedTree> tied;
  bool have_best = false;
  auto evaluate = [&](RootedTree tree) {
    ++result.evaluated;
    auto key = tree.to_newick();
    auto it = cache.find(key);
    const double s = it != cache.end() ? it->second : cache.emplace(key, scorer.score(tree)).first->second;
    if (!have_best || (s < result.best_score && !same_score(s, result.best_score))) {
      have_best = true;
      result.best_score = s;
      tied.clear();
    }
    if (same_score(s, result.best_score)) {
      result.best_score = std::min(result.best_score, s);
      tied.emplace(key, tree);
    }
    return ScoredTree{std::move(tree), s};
  };
  auto rank = [](std::vector<ScoredTree>& pop) {
    std::stable_sort(pop.begin(), pop.end(), [](const ScoredTree& a, const ScoredTree& b) {
      if (a.score != b.score) return a.score < b.score;
      return a.tree.to_newick() < b.tree.to_newick();
    });
  };
  auto report = [&]() {
    result.best_by_generation.push_back(result.best_score);
    if (log) {
      *log << fmt::format("generation {} evaluated {} best {}\n", result.generations, result.evaluated,
                          format_cost(result.best_score));
    }
  };

  std::vector<ScoredTree> population;
  for (std::size_t i = 0; i < params.population; ++i) {
    population.push_back(evaluate(random_rooted_binary_tree(leaves, rng)));
  }
  rank(population);
  report();

  const std::size_t fill = params.population - params.elite;
  const auto explore = static_cast<std::size_t>(std::llround(params.exploration * static_cast<double>(fill)));
  while (result.evaluated < params.budget) {
    ++result.generations;
    std::vector<ScoredTree> next(population.begin(),
                                 population.begin() + static_cast<std::ptrdiff_t>(params.elite));
    for (std::size_t i = 0; i < fill && result.evaluated < params.budget; ++i) {
      if (i < fill - explore) {
        const auto& parent = population[rng.below(params.elite)].tree;
        next.push_back(evaluate(i % 2 == 0 ? nni_neighbor(parent, rng) : spr_neighbor(parent, rng)));
      } else {
        next.push_back(evaluate(random_rooted_binary_tree(leaves, rng)));
      }
    }
    if (fill == 0) break;
    // A generation cut short by the budget keeps the previous runners-up.
    for (std::size_t i = params.elite; next.size() < params.population; ++i) next.push_back(population[i]);
    rank(next);
    population = std::move(next);
    report();
  }
  result.population = std::move(population);
  for (auto& [key, tree] : tied) result.archive.push_back(std::move(tree));
  return result;
}

}  // namespace sctree
