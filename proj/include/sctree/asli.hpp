#pragma once

// Sound-law induction: proto/daughter alignment, base-rule extraction,
// minimal generalization with an accuracy filter, and export of
// correspondences and binary character matrices.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sctree/parsimony.hpp"
#include "sctree/phonology.hpp"
#include "sctree/transition.hpp"

namespace sctree {

inline constexpr std::string_view kProtoLanguage = "PROTO";

struct CognateEntry {
  std::string cogid;
  std::string language;
  std::vector<std::string> segments;
};

struct CognateLoad {
  std::vector<CognateEntry> entries;
  std::vector<std::string> warnings;  // excluded rows
};

// TSV `cogid<TAB>language<TAB>segments` (segments space-separated). Rows with
// unknown phones or no segments are excluded with a warning.
CognateLoad load_cognates(const std::filesystem::path& path, const PhoneFeatureTable& table);

struct AlignmentColumn {
  std::string proto;     // phone or the null phone
  std::string daughter;  // phone or the null phone
  friend bool operator==(const AlignmentColumn&, const AlignmentColumn&) = default;
};

struct Alignment {
  std::vector<AlignmentColumn> columns;
  double total_cost = 0.0;

  std::vector<std::string> proto_segments() const;
  std::vector<std::string> daughter_segments() const;
};

// Global alignment; substitution costs fed_aligned, gaps cost `gap_cost`.
// Traceback prefers substitution, then deletion, then insertion.
Alignment needleman_wunsch(std::span<const std::string> proto, std::span<const std::string> daughter,
                           const PhoneFeatureTable& table, double gap_cost = kIndelCost);

struct AlignedForm {
  std::string cogid;
  std::string language;
  Alignment alignment;
  // Proto-side view: phones, the aligned daughter phone of each, and the
  // daughter phones inserted before proto position g (g = 0..size).
  std::vector<std::string> proto;
  std::vector<std::string> reflex;
  std::vector<std::vector<std::string>> inserted;
};

struct AlignedCorpus {
  std::vector<std::string> languages;  // daughters, sorted
  std::vector<AlignedForm> forms;
  std::vector<std::string> warnings;
};

AlignedForm make_aligned_form(std::string cogid, std::string language, Alignment alignment);
AlignedCorpus align_corpus(const std::vector<CognateEntry>& entries, const PhoneFeatureTable& table);

struct ContextElement {
  enum class Kind { Phone, Set, Class, Boundary, Free };
  static constexpr std::int8_t kUnspecified = 2;

  Kind kind = Kind::Phone;
  std::vector<std::string> phones;         // Phone: one; Set: members in insertion order
  std::vector<std::int8_t> feature_class;  // Class: value per feature or kUnspecified

  static ContextElement phone(std::string p) { return {Kind::Phone, {std::move(p)}, {}}; }
  static ContextElement boundary() { return {Kind::Boundary, {}, {}}; }
  static ContextElement free() { return {Kind::Free, {}, {}}; }

  bool matches(std::string_view phone, const PhoneFeatureTable& table) const;
  std::string text(const PhoneFeatureTable* table = nullptr) const;
  std::string key() const;  // order-insensitive for sets
};

struct SiteCount {
  std::size_t scope = 0;
  std::size_t hits = 0;
};

// from -> to / left _ right. Context lists run outward from the change site.
struct SoundLaw {
  std::string from;
  std::string to;
  std::vector<ContextElement> left;
  std::vector<ContextElement> right;
  std::set<std::string> origin;                  // languages the law was induced from
  std::size_t scope = 0;                         // pooled over origin
  std::size_t hits = 0;
  std::map<std::string, SiteCount> per_language;  // every corpus language with scope > 0

  std::optional<double> accuracy() const {
    if (scope == 0) return std::nullopt;
    return static_cast<double>(hits) / static_cast<double>(scope);
  }
  std::vector<std::string> languages() const;  // languages with at least one hit
  std::string pretty(const PhoneFeatureTable* table = nullptr) const;  // "e → ẽ / (n|m) _"
  std::string key() const;
};

// One law per changed column, with the full proto-side context and # boundaries.
std::vector<SoundLaw> extract_base_rules(const AlignedForm& form);

// Sites of the law per language, over the whole corpus.
std::map<std::string, SiteCount> law_sites(const SoundLaw& law, const AlignedCorpus& corpus,
                                           const PhoneFeatureTable& table);
// Pooled over the law's origin languages (all languages when it has none).
SiteCount law_accuracy(const SoundLaw& law, const AlignedCorpus& corpus, const PhoneFeatureTable& table);
// Fills per_language, scope and hits.
void evaluate_law(SoundLaw& law, const AlignedCorpus& corpus, const PhoneFeatureTable& table);

enum class GeneralizationMode { Set, FeatureClass };
enum class AccuracyMode { Pooled, PerLanguage };

struct InductionConfig {
  GeneralizationMode generalization = GeneralizationMode::Set;
  AccuracyMode accuracy = AccuracyMode::Pooled;
  double threshold = 0.6;  // laws at or below are dropped
  int max_rounds = 32;
  // Largest phone set a Set-mode context element may grow to; 0 = no limit.
  // Unbounded unions make the fixpoint exponential in the phones seen at a
  // context position.
  std::size_t max_set_size = 2;
};

bool passes_filter(const SoundLaw& law, const InductionConfig& config);
std::vector<SoundLaw> filter_by_accuracy(std::vector<SoundLaw> laws, const InductionConfig& config);

// Minimal generalization of two laws with the same change; nullopt otherwise.
std::optional<SoundLaw> generalize_pair(const SoundLaw& a, const SoundLaw& b,
                                        const PhoneFeatureTable& table, GeneralizationMode mode);

// Pairwise generalization to a fixpoint (capped at max_rounds); generated laws
// are evaluated and filtered like their inputs. Sorted by change, then
// accuracy descending.
std::vector<SoundLaw> minimal_generalize(std::vector<SoundLaw> laws, const AlignedCorpus& corpus,
                                         const PhoneFeatureTable& table, const InductionConfig& config = {});

// Extract, merge duplicates, evaluate, filter, generalize.
std::vector<SoundLaw> induce_sound_laws(const AlignedCorpus& corpus, const PhoneFeatureTable& table,
                                        const InductionConfig& config = {});

BinaryMatrix shared_innovation_matrix(const std::vector<SoundLaw>& laws,
                                      const std::vector<std::string>& languages);
BinaryMatrix cognacy_matrix(const std::vector<CognateEntry>& entries);

// One correspondence per law with a proto phone: the majority reflex at the
// law's sites in each language (ties to the smallest phone). Laws with fewer
// than two observed reflexes are skipped.
CorrespondenceTable export_correspondences(const std::vector<SoundLaw>& laws, const AlignedCorpus& corpus,
                                           const PhoneFeatureTable& table);

// `A -> B / LEFT _ RIGHT<TAB>scope<TAB>hits<TAB>languages`
void write_law_dump(std::ostream& out, const std::vector<SoundLaw>& laws,
                    const PhoneFeatureTable* table = nullptr);

}  // namespace sctree
