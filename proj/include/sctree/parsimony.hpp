#pragma once

// Directed Sankoff parsimony over transition matrices, Fitch/Hartigan
// parsimony over binary characters, and a seeded genetic tree search.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sctree/transition.hpp"
#include "sctree/trees.hpp"

namespace sctree {

enum class RootMode { Fixed, Free };

struct SankoffCharacter {
  int id = 0;
  TransitionMatrix matrix;
  std::string root_state;                         // the proto-phoneme
  std::vector<std::string> languages;
  std::vector<std::optional<std::string>> observed;  // parallel to languages; nullopt = missing
};

SankoffCharacter make_sankoff_character(const Correspondence& corr,
                                        const std::vector<std::string>& languages,
                                        TransitionMatrix matrix);

struct BinaryCharacter {
  std::string id;
  std::vector<std::string> languages;
  std::vector<std::optional<bool>> values;  // parallel to languages; nullopt = missing
};

using Character = std::variant<SankoffCharacter, BinaryCharacter>;

double sankoff_score(const RootedTree& tree, const SankoffCharacter& character,
                     RootMode root = RootMode::Fixed);
// Minimum number of 0/1 changes, root state free.
int binary_parsimony_score(const RootedTree& tree, const BinaryCharacter& character);
double tree_score(const RootedTree& tree, std::span<const Character> characters);

namespace detail {
struct BoundSankoff {
  std::size_t states = 0;
  std::vector<double> cost;
  std::optional<std::size_t> root;                     // nullopt = free root
  std::vector<std::optional<std::size_t>> leaf_state;  // per sorted leaf; nullopt = missing
};
struct BoundBinary {
  std::vector<std::uint8_t> leaf_set;  // bit s set = state s allowed at the leaf
};
}  // namespace detail

// Characters bound once to a fixed leaf set so many trees score cheaply.
class ParsimonyScorer {
 public:
  ParsimonyScorer(std::span<const Character> characters, std::vector<std::string> leaves,
                  RootMode sankoff_root = RootMode::Fixed);
  const std::vector<std::string>& leaves() const { return leaves_; }
  double score(const RootedTree& tree) const;

 private:
  std::vector<std::string> leaves_;
  std::vector<detail::BoundSankoff> sankoff_;
  std::vector<detail::BoundBinary> binary_;
};

struct BinaryMatrix {
  std::vector<std::string> languages;
  std::vector<BinaryCharacter> characters;
};

// TSV: header `character<TAB><lang...>`, rows `id<TAB>{0,1,-}...`.
void write_binary_matrix(std::ostream& out, const BinaryMatrix& matrix);
BinaryMatrix read_binary_matrix(const std::filesystem::path& path);

struct SearchParams {
  std::size_t population = 50;
  std::size_t elite = 10;
  double exploration = 0.2;  // share of non-elite slots filled with fresh random trees
  std::size_t budget = 10000;
  std::uint64_t seed = 411;
};

struct ScoredTree {
  RootedTree tree;
  double score = 0.0;
};

struct SearchResult {
  std::uint64_t seed = 0;
  std::size_t evaluated = 0;
  std::size_t generations = 0;
  double best_score = 0.0;
  std::vector<ScoredTree> population;  // final, best first
  std::vector<RootedTree> archive;     // distinct trees tied at best_score, by Newick
  std::vector<double> best_by_generation;
};

// Every candidate scored (cache hits included) counts against the budget.
SearchResult genetic_search(std::span<const Character> characters, std::vector<std::string> leaves,
                            const SearchParams& params = {}, std::ostream* log = nullptr);

// Tree rearrangements on binary trees; both return a canonical tree.
RootedTree nni_neighbor(const RootedTree& tree, Rng& rng);
RootedTree spr_neighbor(const RootedTree& tree, Rng& rng);

}  // namespace sctree
