#pragma once

// Rooted leaf-labelled trees: Newick I/O, rooted quartet classes, generalized
// quartet distance and majority-rule consensus.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sctree/error.hpp"
#include "sctree/random.hpp"

namespace sctree {

class NewickError : public Error {
 public:
  NewickError(std::size_t position, const std::string& what)
      : Error("newick: " + what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct TreeNode {
  int parent = -1;
  std::vector<int> children;
  std::string label;  // leaves only

  bool is_leaf() const { return children.empty(); }
};

// Membership of sorted leaf indices; used for clades.
using LeafSet = std::vector<bool>;

class RootedTree {
 public:
  RootedTree() = default;

  // Suppresses unary nodes, drops internal labels, and renumbers nodes in
  // canonical preorder (children ordered by their smallest leaf label), so
  // equal topologies have equal node arrays.
  static RootedTree from_nodes(std::vector<TreeNode> nodes, int root);
  static RootedTree parse_newick(std::string_view text);
  // Leaves plus pairwise-compatible clades (each given as a label set).
  static RootedTree from_clades(std::vector<std::string> leaves,
                                const std::vector<std::vector<std::string>>& clades);

  std::string to_newick() const;
  std::string render_ascii() const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  int root() const { return root_; }
  bool empty() const { return nodes_.empty(); }
  std::size_t leaf_count() const { return labels_.size(); }
  // Sorted leaf labels; leaf index i below refers to labels()[i].
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::size_t> leaf_index(std::string_view label) const;
  int leaf_node(std::size_t leaf_index) const { return leaf_nodes_[leaf_index]; }
  std::vector<int> postorder() const;
  bool is_binary() const;

  // Leaf sets below every internal node other than the root.
  std::vector<LeafSet> clades() const;

  friend bool operator==(const RootedTree& a, const RootedTree& b) {
    return a.root_ == b.root_ && a.labels_ == b.labels_ && a.to_newick() == b.to_newick();
  }

 private:
  std::vector<TreeNode> nodes_;
  int root_ = -1;
  std::vector<std::string> labels_;
  std::vector<int> leaf_nodes_;
};

enum class QuartetKind { Star, Butterfly };

// `pairing` encodes the split on the four sorted leaf positions (bit i =
// leaves[i]): 0 for a star; a two-bit mask containing bit 0 for a 2|2
// butterfly; a one-bit mask naming the outgroup for a ((x,y,z),w) butterfly,
// whose three ingroup leaves are mutually unresolved.
struct QuartetClass {
  std::array<std::string, 4> leaves;  // sorted
  QuartetKind kind = QuartetKind::Star;
  std::uint8_t pairing = 0;

  std::string describe() const;  // e.g. "A B | C D"
};

QuartetClass classify_quartet(const RootedTree& tree, std::array<std::string, 4> labels);

// Pairwise most-recent-common-ancestor table over leaf indices.
class LcaTable {
 public:
  explicit LcaTable(const RootedTree& tree);
  int lca(std::size_t a, std::size_t b) const { return lca_[a * n_ + b]; }
  int depth(int node) const { return depth_[static_cast<std::size_t>(node)]; }
  // Pairing code as in QuartetClass for sorted leaf indices a < b < c < d.
  std::uint8_t quartet_code(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const;

 private:
  std::size_t n_ = 0;
  std::vector<int> lca_;
  std::vector<int> depth_;
};

struct QuartetCounts {
  std::size_t stars = 0;
  std::size_t butterflies = 0;
};
QuartetCounts count_quartets(const RootedTree& tree);

// (gold butterflies - shared butterflies) / gold butterflies.
double gqd(const RootedTree& hypothesis, const RootedTree& gold);

RootedTree majority_consensus(std::span<const RootedTree> trees, double threshold = 0.5);

// Uniform over rooted binary topologies (random stepwise addition).
RootedTree random_rooted_binary_tree(std::span<const std::string> labels, Rng& rng);
std::vector<RootedTree> all_rooted_binary_trees(std::span<const std::string> labels);
// Every rooted topology, multifurcations included.
std::vector<RootedTree> all_rooted_trees(std::span<const std::string> labels);

}  // namespace sctree
