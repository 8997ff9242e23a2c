#pragma once

// Pipeline orchestration behind the `sctree` command-line tool.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sctree/asli.hpp"
#include "sctree/parsimony.hpp"
#include "sctree/phone_graph.hpp"
#include "sctree/soundchange_model.hpp"
#include "sctree/transition.hpp"
#include "sctree/trees.hpp"

namespace sctree {

// Bad flags or configuration; exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class InferenceMode { Aiscp, Expert, FedAblation, Direct };

std::optional<InferenceMode> parse_inference_mode(std::string_view text);

// Phones of the correspondences that are table entries but not graph inventory.
std::vector<std::string> data_side_phones(const CorrespondenceTable& corrs, const PhoneFeatureTable& table);

// k shortest graph paths from each proto-phoneme to each of its distinct,
// changed reflexes.
PathSet predict_paths(const PhoneGraph& graph, const CorrespondenceTable& corrs, std::size_t k);
// One proto -> reflex edge per changed reflex, weighted by FED.
PathSet direct_paths(const PhoneFeatureTable& table, const CorrespondenceTable& corrs);
// Recomputes per-edge costs from the graph.
void reweight_paths(PathSet& paths, const PhoneGraph& graph);

struct CharacterBuild {
  std::vector<Character> characters;
  std::vector<std::pair<int, TransitionMatrix>> matrices;  // by correspondence id
};

// One Sankoff character per correspondence. Unchanged reflexes get a
// zero-edge path; a changed reflex without a path is an error.
CharacterBuild build_characters(const CorrespondenceTable& corrs, const PathSet& paths, MatrixMode mode,
                                std::optional<double> penalty = std::nullopt);

struct RunOutcome {
  std::size_t run = 0;
  SearchResult search;
  RootedTree tree;  // majority consensus of the run's archive
  std::string log;
};

// Independent searches with seeds derived from params.seed; results are in
// run order whatever the thread count.
std::vector<RunOutcome> run_searches(std::span<const Character> characters,
                                     const std::vector<std::string>& leaves, const SearchParams& params,
                                     std::size_t runs, std::size_t threads, double consensus_threshold,
                                     bool keep_log);

struct GqdSummary {
  std::size_t count = 0;
  double min = 0.0;
  double mean = 0.0;
  double sd = 0.0;  // population
};
GqdSummary summarize(std::span<const double> values);

// Rank correlation with average ranks for ties; NaN when either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

// Entry point. `args` excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace sctree
