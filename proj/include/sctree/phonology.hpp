#pragma once

// Articulatory feature table, phone encodings and Feature Edit Distance.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sctree {

// The null phone: target of deletions and source of insertions.
inline constexpr std::string_view kNullPhone = "∅";

// Cost of a whole-phone insertion or deletion in unweighted FED terms.
inline constexpr double kIndelCost = 1.0;

// Additive penalty for aligning a vowel with a true consonant.
inline constexpr double kVowelConsonantPenalty = 1.0;

inline bool is_null_phone(std::string_view phone) { return phone == kNullPhone; }

// Which phones of the table take part in the phone graph.
//  Full   - every row
//  Pruned - rows whose only diacritics mark length, aspiration or glottalization
enum class DiacriticPolicy { Full, Pruned };

// Ternary feature values: -1 absent, 0 not applicable, +1 present.
struct FeatureVector {
  std::vector<std::int8_t> values;

  std::size_t size() const { return values.size(); }
  std::int8_t operator[](std::size_t f) const { return values[f]; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
  friend auto operator<=>(const FeatureVector&, const FeatureVector&) = default;
};

// Width-3 one-hot block per feature: positions (3f, 3f+1, 3f+2) stand for
// values (-1, 0, +1).
struct OneHotEncoding {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  std::size_t popcount() const;
  friend bool operator==(const OneHotEncoding&, const OneHotEncoding&) = default;
};

OneHotEncoding one_hot(const FeatureVector& v);
FeatureVector decode_one_hot(const OneHotEncoding& e);

std::size_t differing_features(const FeatureVector& a, const FeatureVector& b);

// True when the (NFD) phone carries a diacritic outside the allowed set
// {length, aspiration, glottalization}. Affricate tie bars are not diacritics.
bool has_pruned_diacritic(std::string_view phone);

class PhoneFeatureTable {
 public:
  static PhoneFeatureTable from_csv(std::istream& in, DiacriticPolicy policy,
                                    const std::string& source = "<features>");

  std::size_t feature_count() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  std::optional<std::size_t> feature_index(std::string_view name) const;
  // Throws Error when the table lacks the feature.
  std::size_t require_feature(std::string_view name) const;

  // Lookup is NFD-normalized. Throws UnknownPhoneError for absent phones.
  const FeatureVector& encode(std::string_view phone) const;
  bool contains(std::string_view phone) const;
  // The stored (NFD) spelling of a phone; throws for absent phones.
  std::string canonical(std::string_view phone) const;

  // Every phone in the table, sorted.
  std::vector<std::string> phones() const;
  // Phones admitted by the diacritic policy, sorted. This is the graph inventory.
  const std::vector<std::string>& inventory() const { return inventory_; }
  DiacriticPolicy policy() const { return policy_; }

  // Hash of the ordered feature names; stamps serialized models.
  std::uint64_t feature_names_hash() const;

  bool is_vowel(std::string_view phone) const;      // [+syl, -cons]
  bool is_consonant(std::string_view phone) const;  // [-syl, +cons]

 private:
  std::vector<std::string> feature_names_;
  std::map<std::string, FeatureVector, std::less<>> entries_;
  std::vector<std::string> inventory_;
  DiacriticPolicy policy_ = DiacriticPolicy::Pruned;
};

PhoneFeatureTable load_feature_table(const std::filesystem::path& path,
                                     DiacriticPolicy policy = DiacriticPolicy::Pruned);

// Proportion of features that differ; 1.0 between a phone and the null phone.
double fed(const PhoneFeatureTable& table, std::string_view a, std::string_view b);

// fed() plus the vowel/consonant penalty. Used as alignment substitution cost.
double fed_aligned(const PhoneFeatureTable& table, std::string_view a, std::string_view b,
                   double penalty = kVowelConsonantPenalty);

}  // namespace sctree
