#include "sctree/trees.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace sctree {

namespace {

bool needs_quotes(std::string_view label) {
  for (unsigned char c : label) {
    if (std::isspace(c) || std::string_view("()[]',:;").find(static_cast<char>(c)) != std::string_view::npos) {
      return true;
    }
  }
  return label.empty();
}

std::string quote_label(std::string_view label) {
  if (!needs_quotes(label)) return std::string(label);
  std::string out = "'";
  for (char c : label) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

class NewickParser {
 public:
  explicit NewickParser(std::string_view text) : text_(text) {}

  RootedTree parse() {
    skip();
    if (pos_ >= text_.size() || text_[pos_] == ';') throw NewickError(pos_, "empty tree");
    const int root = subtree(-1);
    skip();
    if (pos_ >= text_.size()) throw NewickError(pos_, "missing ';'");
    if (text_[pos_] == ')') throw NewickError(pos_, "unbalanced parentheses");
    if (text_[pos_] != ';') throw NewickError(pos_, "expected ';'");
    ++pos_;
    skip();
    if (pos_ < text_.size()) throw NewickError(pos_, "trailing text after ';'");
    return RootedTree::from_nodes(std::move(nodes_), root);
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '[') {
        const auto close = text_.find(']', pos_);
        if (close == std::string_view::npos) throw NewickError(pos_, "unterminated comment");
        pos_ = close + 1;
      } else {
        break;
      }
    }
  }

  std::string label() {
    skip();
    std::string out;
    if (pos_ < text_.size() && text_[pos_] == '\'') {
      const std::size_t start = pos_++;
      while (true) {
        if (pos_ >= text_.size()) throw NewickError(start, "unterminated quoted label");
        if (text_[pos_] == '\'') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
            out += '\'';
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        out += text_[pos_++];
      }
      return out;
    }
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) ||
          std::string_view("()[]',:;").find(c) != std::string_view::npos) {
        break;
      }
      out += c;
      ++pos_;
    }
    return out;
  }

  void branch_length() {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != ':') return;
    ++pos_;
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            std::string_view("+-.eE").find(text_[pos_]) != std::string_view::npos)) {
      ++pos_;
    }
    double value = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (start == pos_ || res.ec != std::errc() || res.ptr != text_.data() + pos_) {
      throw NewickError(start, "bad branch length");
    }
  }

  int subtree(int parent) {
    skip();
    if (pos_ >= text_.size()) throw NewickError(pos_, "unbalanced parentheses");
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{parent, {}, {}});
    if (text_[pos_] == '(') {
      const std::size_t open = pos_++;
      while (true) {
        const int child = subtree(id);
        nodes_[static_cast<std::size_t>(id)].children.push_back(child);
        skip();
        if (pos_ >= text_.size()) throw NewickError(open, "unbalanced parentheses");
        if (text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (text_[pos_] == ')') {
          ++pos_;
          break;
        }
        throw NewickError(pos_, "expected ',' or ')'");
      }
      label();  // internal labels are ignored
    } else {
      const std::size_t start = pos_;
      std::string name = label();
      if (name.empty()) throw NewickError(start, "expected a leaf label");
      if (!seen_.emplace(name, start).second) {
        throw NewickError(start, "duplicate leaf label '" + name + "'");
      }
      nodes_[static_cast<std::size_t>(id)].label = std::move(name);
    }
    branch_length();
    return id;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<TreeNode> nodes_;
  std::map<std::string, std::size_t> seen_;
};

// Attaches a new leaf on the edge above `v` (a new root when v is the root).
void insert_above(std::vector<TreeNode>& nodes, int& root, int v, const std::string& label) {
  const int leaf = static_cast<int>(nodes.size());
  nodes.push_back(TreeNode{-1, {}, label});
  const int joint = static_cast<int>(nodes.size());
  nodes.push_back(TreeNode{-1, {v, leaf}, {}});
  auto& vn = nodes[static_cast<std::size_t>(v)];
  const int p = vn.parent;
  nodes[static_cast<std::size_t>(joint)].parent = p;
  vn.parent = joint;
  nodes[static_cast<std::size_t>(leaf)].parent = joint;
  if (p < 0) {
    root = joint;
  } else {
    auto& siblings = nodes[static_cast<std::size_t>(p)].children;
    std::replace(siblings.begin(), siblings.end(), v, joint);
  }
}

void insert_child(std::vector<TreeNode>& nodes, int v, const std::string& label) {
  const int leaf = static_cast<int>(nodes.size());
  nodes.push_back(TreeNode{v, {}, label});
  nodes[static_cast<std::size_t>(v)].children.push_back(leaf);
}

RootedTree tree_from_leafsets(std::vector<std::string> leaves, std::vector<LeafSet> sets) {
  const std::size_t n = leaves.size();
  std::sort(sets.begin(), sets.end(), [](const LeafSet& a, const LeafSet& b) {
    const auto ca = std::count(a.begin(), a.end(), true);
    const auto cb = std::count(b.begin(), b.end(), true);
    if (ca != cb) return ca > cb;
    return a > b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  std::vector<TreeNode> nodes(1);
  std::vector<LeafSet> kept;
  std::vector<int> kept_node;
  auto contains = [](const LeafSet& big, const LeafSet& small) {
    for (std::size_t i = 0; i < big.size(); ++i) {
      if (small[i] && !big[i]) return false;
    }
    return true;
  };
  auto owner = [&](const LeafSet& s) {
    for (std::size_t k = kept.size(); k-- > 0;) {
      if (contains(kept[k], s)) return kept_node[k];
    }
    return 0;
  };
  for (const auto& s : sets) {
    const auto size = std::count(s.begin(), s.end(), true);
    if (size <= 1 || static_cast<std::size_t>(size) == n) continue;
    for (const auto& k : kept) {
      bool overlap = false;
      for (std::size_t i = 0; i < n; ++i) overlap = overlap || (s[i] && k[i]);
      if (overlap && !contains(k, s)) throw Error("incompatible clades");
    }
    const int parent = owner(s);
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{parent, {}, {}});
    nodes[static_cast<std::size_t>(parent)].children.push_back(id);
    kept.push_back(s);
    kept_node.push_back(id);
  }
  for (std::size_t i = 0; i < n; ++i) {
    LeafSet single(n, false);
    single[i] = true;
    const int parent = owner(single);
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{parent, {}, leaves[i]});
    nodes[static_cast<std::size_t>(parent)].children.push_back(id);
  }
  return RootedTree::from_nodes(std::move(nodes), 0);
}

void require_same_leaves(const RootedTree& a, const RootedTree& b) {
  if (a.labels() == b.labels()) return;
  std::vector<std::string> diff;
  std::set_symmetric_difference(a.labels().begin(), a.labels().end(), b.labels().begin(),
                                b.labels().end(), std::back_inserter(diff));
  std::string msg = "leaf sets differ:";
  for (const auto& d : diff) msg += " " + d;
  throw Error(msg);
}

}  // namespace

RootedTree RootedTree::from_nodes(std::vector<TreeNode> in, int root) {
  if (in.empty() || root < 0 || static_cast<std::size_t>(root) >= in.size()) {
    throw Error("empty tree");
  }
  // Input parent fields are ignored; structure comes from child lists.
  std::vector<char> visited(in.size(), 0);
  std::vector<int> order;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (v < 0 || static_cast<std::size_t>(v) >= in.size()) throw Error("child index out of range");
    if (visited[static_cast<std::size_t>(v)]++) throw Error("tree contains a cycle or shared node");
    order.push_back(v);
    for (int c : in[static_cast<std::size_t>(v)].children) stack.push_back(c);
  }
  std::vector<std::string> min_label(in.size());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& n = in[static_cast<std::size_t>(*it)];
    if (n.children.empty()) {
      if (n.label.empty()) throw Error("leaf without a label");
      min_label[static_cast<std::size_t>(*it)] = n.label;
    } else {
      auto& m = min_label[static_cast<std::size_t>(*it)];
      m = min_label[static_cast<std::size_t>(n.children.front())];
      for (int c : n.children) m = std::min(m, min_label[static_cast<std::size_t>(c)]);
    }
  }
  auto resolve = [&](int v) {
    while (in[static_cast<std::size_t>(v)].children.size() == 1) {
      v = in[static_cast<std::size_t>(v)].children.front();
    }
    return v;
  };

  RootedTree t;
  std::function<int(int, int)> emit = [&](int v, int parent) {
    v = resolve(v);
    const int id = static_cast<int>(t.nodes_.size());
    const auto& src = in[static_cast<std::size_t>(v)];
    t.nodes_.push_back(TreeNode{parent, {}, src.children.empty() ? src.label : std::string()});
    std::vector<int> kids;
    for (int c : src.children) kids.push_back(resolve(c));
    std::sort(kids.begin(), kids.end(), [&](int a, int b) {
      return min_label[static_cast<std::size_t>(a)] < min_label[static_cast<std::size_t>(b)];
    });
    for (int c : kids) {
      const int child = emit(c, id);
      t.nodes_[static_cast<std::size_t>(id)].children.push_back(child);
    }
    return id;
  };
  t.root_ = emit(root, -1);

  std::vector<std::pair<std::string, int>> leaves;
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    if (t.nodes_[i].is_leaf()) leaves.emplace_back(t.nodes_[i].label, static_cast<int>(i));
  }
  std::sort(leaves.begin(), leaves.end());
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (i > 0 && leaves[i].first == leaves[i - 1].first) {
      throw Error("duplicate leaf label '" + leaves[i].first + "'");
    }
    t.labels_.push_back(leaves[i].first);
    t.leaf_nodes_.push_back(leaves[i].second);
  }
  return t;
}

RootedTree RootedTree::parse_newick(std::string_view text) { return NewickParser(text).parse(); }

RootedTree RootedTree::from_clades(std::vector<std::string> leaves,
                                   const std::vector<std::vector<std::string>>& clades) {
  std::sort(leaves.begin(), leaves.end());
  if (leaves.empty()) throw Error("empty tree");
  if (std::adjacent_find(leaves.begin(), leaves.end()) != leaves.end()) {
    throw Error("duplicate leaf label");
  }
  std::vector<LeafSet> sets;
  for (const auto& clade : clades) {
    LeafSet s(leaves.size(), false);
    for (const auto& l : clade) {
      auto it = std::lower_bound(leaves.begin(), leaves.end(), l);
      if (it == leaves.end() || *it != l) throw Error("clade label '" + l + "' is not a leaf");
      s[static_cast<std::size_t>(it - leaves.begin())] = true;
    }
    sets.push_back(std::move(s));
  }
  return tree_from_leafsets(std::move(leaves), std::move(sets));
}

std::string RootedTree::to_newick() const {
  if (empty()) return ";";
  std::string out;
  std::function<void(int)> go = [&](int v) {
    const auto& n = node(v);
    if (n.is_leaf()) {
      out += quote_label(n.label);
      return;
    }
    out += '(';
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i) out += ',';
      go(n.children[i]);
    }
    out += ')';
  };
  go(root_);
  return out + ";";
}

std::string RootedTree::render_ascii() const {
  std::ostringstream out;
  std::function<void(int, const std::string&, bool, bool)> go = [&](int v, const std::string& prefix,
                                                                    bool last, bool top) {
    const auto& n = node(v);
    out << prefix << (top ? "" : (last ? "`-- " : "|-- ")) << (n.is_leaf() ? n.label : "+") << '\n';
    const std::string next = top ? prefix : prefix + (last ? "    " : "|   ");
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      go(n.children[i], next, i + 1 == n.children.size(), false);
    }
  };
  if (!empty()) go(root_, "", true, true);
  return out.str();
}

std::optional<std::size_t> RootedTree::leaf_index(std::string_view label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<int> RootedTree::postorder() const {
  // Canonical preorder numbering puts every child after its parent.
  std::vector<int> order(nodes_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(order.size() - 1 - i);
  return order;
}

bool RootedTree::is_binary() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [](const TreeNode& n) { return n.is_leaf() || n.children.size() == 2; });
}

std::vector<LeafSet> RootedTree::clades() const {
  const std::size_t n = leaf_count();
  std::vector<LeafSet> below(nodes_.size(), LeafSet(n, false));
  for (std::size_t i = 0; i < n; ++i) below[static_cast<std::size_t>(leaf_nodes_[i])][i] = true;
  for (int v : postorder()) {
    const auto& nd = node(v);
    for (int c : nd.children) {
      for (std::size_t i = 0; i < n; ++i) {
        if (below[static_cast<std::size_t>(c)][i]) below[static_cast<std::size_t>(v)][i] = true;
      }
    }
  }
  std::vector<LeafSet> out;
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (static_cast<int>(v) != root_ && !nodes_[v].is_leaf()) out.push_back(below[v]);
  }
  return out;
}

std::string QuartetClass::describe() const {
  if (kind == QuartetKind::Star) {
    return leaves[0] + " " + leaves[1] + " " + leaves[2] + " " + leaves[3] + " (star)";
  }
  std::string in, out;
  for (std::size_t i = 0; i < 4; ++i) {
    auto& side = (pairing >> i) & 1U ? in : out;
    side += (side.empty() ? "" : " ") + leaves[i];
  }
  if (std::popcount(pairing) == 1) return "(" + out + ") | " + in;
  return in + " | " + out;
}

LcaTable::LcaTable(const RootedTree& tree) : n_(tree.leaf_count()) {
  const auto& nodes = tree.nodes();
  depth_.assign(nodes.size(), 0);
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v].parent >= 0) depth_[v] = depth_[static_cast<std::size_t>(nodes[v].parent)] + 1;
  }
  lca_.assign(n_ * n_, -1);
  std::vector<std::vector<std::size_t>> below(nodes.size());
  for (std::size_t i = 0; i < n_; ++i) {
    below[static_cast<std::size_t>(tree.leaf_node(i))].push_back(i);
    lca_[i * n_ + i] = tree.leaf_node(i);
  }
  for (int v : tree.postorder()) {
    const auto& kids = nodes[static_cast<std::size_t>(v)].children;
    auto& mine = below[static_cast<std::size_t>(v)];
    for (std::size_t x = 0; x < kids.size(); ++x) {
      const auto& bx = below[static_cast<std::size_t>(kids[x])];
      for (std::size_t y = x + 1; y < kids.size(); ++y) {
        for (std::size_t a : bx) {
          for (std::size_t b : below[static_cast<std::size_t>(kids[y])]) {
            lca_[a * n_ + b] = v;
            lca_[b * n_ + a] = v;
          }
        }
      }
      mine.insert(mine.end(), bx.begin(), bx.end());
    }
  }
}

std::uint8_t LcaTable::quartet_code(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
  const std::array<std::size_t, 4> q{a, b, c, d};
  static constexpr std::array<std::pair<int, int>, 6> kPairs{
      {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  int top = -1;
  int deep = -1;
  std::size_t deep_pair = 0;
  for (std::size_t p = 0; p < kPairs.size(); ++p) {
    const int node = lca(q[static_cast<std::size_t>(kPairs[p].first)], q[static_cast<std::size_t>(kPairs[p].second)]);
    const int dep = depth(node);
    if (top < 0 || dep < top) top = dep;
    if (dep > deep) {
      deep = dep;
      deep_pair = p;
    }
  }
  if (deep == top) return 0;
  const auto [i, j] = kPairs[deep_pair];
  std::uint8_t inside = static_cast<std::uint8_t>((1U << i) | (1U << j));
  for (int k = 0; k < 4; ++k) {
    if (k == i || k == j) continue;
    if (depth(lca(q[static_cast<std::size_t>(k)], q[static_cast<std::size_t>(i)])) >= deep) {
      inside = static_cast<std::uint8_t>(inside | (1U << k));
    }
  }
  if (std::popcount(inside) == 3) return static_cast<std::uint8_t>(0xF & ~inside);
  return (inside & 1U) ? inside : static_cast<std::uint8_t>(0xF & ~inside);
}

QuartetClass classify_quartet(const RootedTree& tree, std::array<std::string, 4> labels) {
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw Error("quartet labels must be distinct");
  }
  std::array<std::size_t, 4> idx{};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto li = tree.leaf_index(labels[i]);
    if (!li) throw Error("unknown leaf label '" + labels[i] + "'");
    idx[i] = *li;
  }
  const LcaTable table(tree);
  QuartetClass out;
  out.leaves = labels;
  out.pairing = table.quartet_code(idx[0], idx[1], idx[2], idx[3]);
  out.kind = out.pairing ? QuartetKind::Butterfly : QuartetKind::Star;
  return out;
}

QuartetCounts count_quartets(const RootedTree& tree) {
  const LcaTable table(tree);
  const std::size_t n = tree.leaf_count();
  QuartetCounts counts;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d) {
          if (table.quartet_code(a, b, c, d)) {
            ++counts.butterflies;
          } else {
            ++counts.stars;
          }
        }
  return counts;
}

double gqd(const RootedTree& hypothesis, const RootedTree& gold) {
  require_same_leaves(hypothesis, gold);
  const LcaTable gt(gold);
  const LcaTable ht(hypothesis);
  const std::size_t n = gold.leaf_count();
  std::size_t gold_b = 0, shared = 0, hyp_b = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d) {
          const auto g = gt.quartet_code(a, b, c, d);
          const auto h = ht.quartet_code(a, b, c, d);
          if (h) ++hyp_b;
          if (g) {
            ++gold_b;
            if (g == h) ++shared;
          }
        }
  if (gold_b == 0) {
    if (hyp_b == 0) return 0.0;
    throw Error("gold tree has no butterflies; quartet distance undefined");
  }
  return static_cast<double>(gold_b - shared) / static_cast<double>(gold_b);
}

RootedTree majority_consensus(std::span<const RootedTree> trees, double threshold) {
  if (trees.empty()) throw Error("consensus needs at least one tree");
  if (!(threshold >= 0.5 && threshold < 1.0)) {
    throw Error("consensus threshold must lie in [0.5, 1)");
  }
  std::map<LeafSet, std::size_t> counts;
  for (const auto& t : trees) {
    require_same_leaves(t, trees.front());
    for (auto& c : t.clades()) ++counts[c];
  }
  std::vector<LeafSet> kept;
  const double need = threshold * static_cast<double>(trees.size());
  for (const auto& [clade, count] : counts) {
    if (static_cast<double>(count) > need) kept.push_back(clade);
  }
  return tree_from_leafsets(trees.front().labels(), std::move(kept));
}

RootedTree random_rooted_binary_tree(std::span<const std::string> labels, Rng& rng) {
  if (labels.empty()) throw Error("random tree needs at least one leaf");
  std::vector<TreeNode> nodes{TreeNode{-1, {}, labels[0]}};
  int root = 0;
  for (std::size_t k = 1; k < labels.size(); ++k) {
    const int v = static_cast<int>(rng.below(nodes.size()));
    insert_above(nodes, root, v, labels[k]);
  }
  return RootedTree::from_nodes(std::move(nodes), root);
}

namespace {

void grow(std::vector<TreeNode> nodes, int root, std::span<const std::string> labels, std::size_t next,
          bool multifurcating, std::vector<RootedTree>& out) {
  if (next == labels.size()) {
    out.push_back(RootedTree::from_nodes(std::move(nodes), root));
    return;
  }
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    auto copy = nodes;
    int r = root;
    insert_above(copy, r, static_cast<int>(v), labels[next]);
    grow(std::move(copy), r, labels, next + 1, multifurcating, out);
    if (multifurcating && !nodes[v].is_leaf()) {
      auto extra = nodes;
      insert_child(extra, static_cast<int>(v), labels[next]);
      grow(std::move(extra), root, labels, next + 1, multifurcating, out);
    }
  }
}

std::vector<RootedTree> enumerate(std::span<const std::string> labels, bool multifurcating) {
  if (labels.empty()) throw Error("enumeration needs at least one leaf");
  std::vector<RootedTree> out;
  grow({TreeNode{-1, {}, labels[0]}}, 0, labels, 1, multifurcating, out);
  return out;
}

}  // namespace

std::vector<RootedTree> all_rooted_binary_trees(std::span<const std::string> labels) {
  return enumerate(labels, false);
}

std::vector<RootedTree> all_rooted_trees(std::span<const std::string> labels) {
  return enumerate(labels, true);
}

}  // namespace sctree
