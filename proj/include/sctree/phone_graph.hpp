#pragma once

// Complete directed phone graph (plus the null phone) and k-shortest
// intermediate paths between a proto-phoneme and its reflex.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sctree/phonology.hpp"
#include "sctree/soundchange_model.hpp"

namespace sctree {

enum class GraphMode { Dwfed, FedAblation };

struct GraphConfig {
  double insertion_mult = 15.0;
  double deletion_mult = 10.0;
  // Ordered pairs sampled to estimate the null-phone base cost in Dwfed mode.
  std::size_t base_sample = 2000;
  std::uint64_t seed = 411;
};

struct IntermediatePath {
  std::vector<std::string> phones;  // proto .. reflex inclusive
  std::vector<double> edge_costs;   // one per edge; may be empty for loaded expert paths
  double total_cost = 0.0;

  std::size_t edges() const { return phones.empty() ? 0 : phones.size() - 1; }
  const std::string& proto() const { return phones.front(); }
  const std::string& reflex() const { return phones.back(); }
  // "p>f>h"
  std::string joined() const;
  friend bool operator==(const IntermediatePath& a, const IntermediatePath& b) {
    return a.phones == b.phones;
  }
};

// Node ids are ordered so that comparing id sequences lexicographically equals
// comparing the phone-string sequences. Weight +inf means "no edge".
struct DigraphPath {
  std::vector<std::size_t> nodes;
  double cost = 0.0;
};

using WeightFn = std::function<double(std::size_t, std::size_t)>;

// Up to k loopless paths in nondecreasing cost (Yen over Dijkstra). Costs equal
// within a relative 1e-9 tie and are ordered lexicographically by node sequence.
std::vector<DigraphPath> k_shortest_paths(std::size_t node_count, const WeightFn& weight,
                                          std::size_t source, std::size_t target,
                                          std::size_t k = 1);

class PhoneGraph {
 public:
  // `model` null selects the symmetric FED ablation. `extra_phones` (table
  // phones outside the pruned inventory, e.g. data-side reflexes) join the
  // node set.
  static PhoneGraph build(const PhoneFeatureTable& table, const FeatureEditModel* model,
                          const GraphConfig& config = {},
                          const std::vector<std::string>& extra_phones = {});

  GraphMode mode() const { return mode_; }
  std::size_t node_count() const { return phones_.size(); }
  const std::string& phone(std::size_t id) const { return phones_[id]; }
  const std::vector<std::string>& phones() const { return phones_; }
  std::optional<std::size_t> index_of(std::string_view phone) const;
  // Base cost the indel multipliers scale; 1.0 in the FED ablation.
  double indel_base() const { return indel_base_; }
  const GraphConfig& config() const { return config_; }

  double weight(std::size_t from, std::size_t to) const;
  double weight(std::string_view from, std::string_view to) const;

  std::vector<IntermediatePath> shortest_paths(std::string_view proto, std::string_view reflex,
                                               std::size_t k = 1) const;

 private:
  GraphMode mode_ = GraphMode::FedAblation;
  GraphConfig config_;
  std::vector<std::string> phones_;  // sorted; includes the null phone
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<FeatureVector> vectors_;
  std::vector<std::vector<double>> probabilities_;  // per node; Dwfed mode only
  std::size_t null_id_ = 0;
  double indel_base_ = kIndelCost;
};

// Correspondence id -> paths for that correspondence.
using PathSet = std::map<int, std::vector<IntermediatePath>>;

// TSV: corr_id<TAB>proto<TAB>reflex<TAB>p1>p2>...<TAB>total_cost
void write_path_dump(std::ostream& out, const PathSet& paths);
// Phones are checked against `table` when given (the null phone is always allowed).
PathSet read_path_dump(const std::filesystem::path& path, const PhoneFeatureTable* table);

struct PathStats {
  double avg_num_paths = 0.0;
  double avg_edges_per_path = 0.0;
};

// Averages over unique (proto, reflex) pairs; edge counts pooled over their
// unique paths.
PathStats path_stats(const PathSet& paths);

// Share of the expert's intermediate phones (endpoints excluded) that occur
// on the predicted paths of the same correspondence, pooled.
double expert_path_recall(const PathSet& predicted, const PathSet& expert);

}  // namespace sctree
