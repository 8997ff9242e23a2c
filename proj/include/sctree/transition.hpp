#pragma once

// Per-correspondence directed transition-cost matrices built from
// intermediate paths.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sctree/phone_graph.hpp"
#include "sctree/phonology.hpp"

namespace sctree {

// A proto-phoneme and its reflex in each language. A reflex is a phone, the
// null phone (loss) or absent (missing data).
struct Correspondence {
  int id = 0;
  std::string proto;
  std::vector<std::optional<std::string>> reflexes;  // parallel to the table's languages

  // Distinct observed reflexes, sorted.
  std::vector<std::string> distinct_reflexes() const;
};

struct CorrespondenceTable {
  std::vector<std::string> languages;
  std::vector<Correspondence> rows;

  const Correspondence& find(int id) const;
};

// TSV with header `id<TAB>proto<TAB><lang...>`; cells are a phone, "∅" or "-".
// Phones are validated and canonicalized against `table` when given.
CorrespondenceTable load_correspondences(const std::filesystem::path& path,
                                         const PhoneFeatureTable* table);
void write_correspondences(std::ostream& out, const CorrespondenceTable& table);

enum class MatrixMode { ExpertUnitEdges, Weighted };

struct TransitionMatrix {
  std::vector<std::string> states;  // sorted
  std::vector<double> cost;         // row-major states x states
  double penalty = 0.0;
  MatrixMode mode = MatrixMode::ExpertUnitEdges;

  std::size_t size() const { return states.size(); }
  double at(std::size_t from, std::size_t to) const { return cost[from * states.size() + to]; }
  std::optional<std::size_t> index_of(std::string_view phone) const;
};

// All-pairs shortest-path closure over the directed union of `paths`; ordered
// pairs with no directed path get the penalty (default 1000 x max(1, largest
// finite cost)).
TransitionMatrix build_matrix(const Correspondence& corr, const std::vector<IntermediatePath>& paths,
                              MatrixMode mode, std::optional<double> penalty = std::nullopt);

// Expert (or previously dumped) paths grouped by correspondence id.
PathSet load_expert_paths(const std::filesystem::path& path, const PhoneFeatureTable& table);

// Square TSV with a state header row and column; penalty recorded on a comment line.
void write_matrix(std::ostream& out, int corr_id, const TransitionMatrix& matrix);

}  // namespace sctree
