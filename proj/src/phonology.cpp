#include "sctree/phonology.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <fstream>

#include "sctree/error.hpp"
#include "sctree/random.hpp"
#include "sctree/text.hpp"

namespace sctree {

namespace {

bool allowed_diacritic(char32_t c) {
  switch (c) {
    case U'ʰ':  // ʰ aspiration
    case U'ː':  // ː length
    case U'ˑ':  // ˑ half-length
    case U'ʼ':  // ʼ ejective
    case U'ˀ':  // ˀ glottalized
    case U'͡':  // tie bars
    case U'͜':
      return true;
    default:
      return false;
  }
}

std::int8_t parse_cell(std::string_view cell, const std::string& source, std::size_t line) {
  if (cell == "+") return 1;
  if (cell == "-") return -1;
  if (cell == "0") return 0;
  throw ParseError(source, line, "unknown feature value '" + std::string(cell) + "'");
}

}  // namespace

std::size_t OneHotEncoding::popcount() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
}

OneHotEncoding one_hot(const FeatureVector& v) {
  OneHotEncoding e;
  e.bits.assign(3 * v.size(), 0);
  for (std::size_t f = 0; f < v.size(); ++f) {
    e.bits[3 * f + static_cast<std::size_t>(v[f] + 1)] = 1;
  }
  return e;
}

FeatureVector decode_one_hot(const OneHotEncoding& e) {
  FeatureVector v;
  v.values.resize(e.size() / 3);
  for (std::size_t f = 0; f < v.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      if (e.bits[3 * f + k]) v.values[f] = static_cast<std::int8_t>(k - 1);
    }
  }
  return v;
}

std::size_t differing_features(const FeatureVector& a, const FeatureVector& b) {
  std::size_t n = 0;
  for (std::size_t f = 0; f < a.size(); ++f) n += a[f] != b[f];
  return n;
}

bool has_pruned_diacritic(std::string_view phone) {
  for (char32_t c : codepoints(phone)) {
    const auto type = u_charType(static_cast<UChar32>(c));
    const bool diacritic = type == U_NON_SPACING_MARK || type == U_MODIFIER_LETTER ||
                           type == U_MODIFIER_SYMBOL || type == U_ENCLOSING_MARK ||
                           type == U_COMBINING_SPACING_MARK;
    if (diacritic && !allowed_diacritic(c)) return true;
  }
  return false;
}

PhoneFeatureTable PhoneFeatureTable::from_csv(std::istream& in, DiacriticPolicy policy,
                                              const std::string& source) {
  PhoneFeatureTable table;
  table.policy_ = policy;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (!have_header) {
      if (cells.size() < 2 || trim(cells[0]) != "phone") {
        throw ParseError(source, lineno, "expected header 'phone,<features...>'");
      }
      for (std::size_t i = 1; i < cells.size(); ++i) {
        table.feature_names_.emplace_back(trim(cells[i]));
      }
      have_header = true;
      continue;
    }
    if (cells.size() != table.feature_names_.size() + 1) {
      throw ParseError(source, lineno,
                       "expected " + std::to_string(table.feature_names_.size() + 1) +
                           " cells, got " + std::to_string(cells.size()));
    }
    std::string phone = nfd(trim(cells[0]));
    if (phone.empty()) throw ParseError(source, lineno, "empty phone");
    FeatureVector v;
    v.values.reserve(table.feature_names_.size());
    for (std::size_t i = 1; i < cells.size(); ++i) {
      v.values.push_back(parse_cell(trim(cells[i]), source, lineno));
    }
    if (table.entries_.count(phone)) {
      throw ParseError(source, lineno, "duplicate phone '" + phone + "'");
    }
    table.entries_.emplace(std::move(phone), std::move(v));
  }
  if (!have_header) throw ParseError(source, 0, "empty feature table");
  if (table.entries_.empty()) throw ParseError(source, 0, "feature table has no phones");

  for (const auto& [phone, v] : table.entries_) {
    if (policy == DiacriticPolicy::Full || !has_pruned_diacritic(phone)) {
      table.inventory_.push_back(phone);
    }
  }
  return table;
}

PhoneFeatureTable load_feature_table(const std::filesystem::path& path,
                                     DiacriticPolicy policy) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open feature table '" + path.string() + "'");
  return PhoneFeatureTable::from_csv(in, policy, path.string());
}

std::optional<std::size_t> PhoneFeatureTable::feature_index(std::string_view name) const {
  for (std::size_t i = 0; i < feature_names_.size(); ++i) {
    if (feature_names_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t PhoneFeatureTable::require_feature(std::string_view name) const {
  if (auto i = feature_index(name)) return *i;
  throw Error("feature table has no feature '" + std::string(name) + "'");
}

const FeatureVector& PhoneFeatureTable::encode(std::string_view phone) const {
  if (auto it = entries_.find(phone); it != entries_.end()) return it->second;
  const std::string norm = nfd(phone);
  if (auto it = entries_.find(norm); it != entries_.end()) return it->second;
  throw UnknownPhoneError(std::string(phone));
}

bool PhoneFeatureTable::contains(std::string_view phone) const {
  return entries_.find(phone) != entries_.end() || entries_.find(nfd(phone)) != entries_.end();
}

std::string PhoneFeatureTable::canonical(std::string_view phone) const {
  if (entries_.find(phone) != entries_.end()) return std::string(phone);
  std::string norm = nfd(phone);
  if (entries_.find(norm) != entries_.end()) return norm;
  throw UnknownPhoneError(std::string(phone));
}

std::vector<std::string> PhoneFeatureTable::phones() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [p, v] : entries_) out.push_back(p);
  return out;
}

std::uint64_t PhoneFeatureTable::feature_names_hash() const {
  std::string joined;
  for (const auto& n : feature_names_) {
    joined += n;
    joined += '\x1f';
  }
  return fnv1a64(joined);
}

bool PhoneFeatureTable::is_vowel(std::string_view phone) const {
  const auto& v = encode(phone);
  return v[require_feature("syl")] == 1 && v[require_feature("cons")] == -1;
}

bool PhoneFeatureTable::is_consonant(std::string_view phone) const {
  const auto& v = encode(phone);
  return v[require_feature("syl")] == -1 && v[require_feature("cons")] == 1;
}

double fed(const PhoneFeatureTable& table, std::string_view a, std::string_view b) {
  const bool a_null = is_null_phone(a);
  const bool b_null = is_null_phone(b);
  if (a_null || b_null) {
    if (!a_null) table.encode(a);
    if (!b_null) table.encode(b);
    return a_null && b_null ? 0.0 : kIndelCost;
  }
  const auto& va = table.encode(a);
  const auto& vb = table.encode(b);
  return static_cast<double>(differing_features(va, vb)) /
         static_cast<double>(table.feature_count());
}

double fed_aligned(const PhoneFeatureTable& table, std::string_view a, std::string_view b,
                   double penalty) {
  const double base = fed(table, a, b);
  if (is_null_phone(a) || is_null_phone(b)) return base;
  const bool mixed = (table.is_vowel(a) && table.is_consonant(b)) ||
                     (table.is_consonant(a) && table.is_vowel(b));
  return mixed ? base + penalty : base;
}

}  // namespace sctree
