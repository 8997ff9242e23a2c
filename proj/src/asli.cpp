#include "sctree/asli.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>
#include <unordered_set>

#include "sctree/error.hpp"
#include "sctree/text.hpp"

namespace sctree {

namespace {

const std::string kNull(kNullPhone);

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

// Does the context (outward from the site) fit the proto sequence, reading
// positions start, start+step, ...?
bool context_matches(const std::vector<ContextElement>& context, const std::vector<std::string>& seq,
                     long start, long step, const PhoneFeatureTable& table) {
  long pos = start;
  const long n = static_cast<long>(seq.size());
  for (const auto& e : context) {
    switch (e.kind) {
      case ContextElement::Kind::Free:
        return true;
      case ContextElement::Kind::Boundary:
        if (pos != -1 && pos != n) return false;
        break;
      default:
        if (pos < 0 || pos >= n) return false;
        if (!e.matches(seq[static_cast<std::size_t>(pos)], table)) return false;
    }
    pos += step;
  }
  return true;
}

// (form, position) pairs where a law rewriting `from` could apply; for
// insertions, every gap of every form.
using SiteList = std::vector<std::pair<std::size_t, std::size_t>>;

SiteList candidate_sites(const AlignedCorpus& corpus, std::string_view from) {
  SiteList out;
  for (std::size_t fi = 0; fi < corpus.forms.size(); ++fi) {
    const auto& seq = corpus.forms[fi].proto;
    if (is_null_phone(from)) {
      for (std::size_t g = 0; g <= seq.size(); ++g) out.emplace_back(fi, g);
      continue;
    }
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq[i] == from) out.emplace_back(fi, i);
    }
  }
  return out;
}

std::map<std::string, SiteCount> count_sites(const SoundLaw& law, const AlignedCorpus& corpus,
                                             const SiteList& sites, const PhoneFeatureTable& table) {
  std::map<std::string, SiteCount> out;
  const bool insertion = is_null_phone(law.from);
  // An insertion at gap g sits between positions g-1 and g.
  const long right_offset = insertion ? 0 : 1;
  for (const auto& [fi, pos] : sites) {
    const auto& f = corpus.forms[fi];
    const long p = static_cast<long>(pos);
    if (!context_matches(law.left, f.proto, p - 1, -1, table) ||
        !context_matches(law.right, f.proto, p + right_offset, 1, table)) {
      continue;
    }
    auto& c = out[f.language];
    ++c.scope;
    if (insertion) {
      const auto& ins = f.inserted[pos];
      if (std::find(ins.begin(), ins.end(), law.to) != ins.end()) ++c.hits;
    } else if (f.reflex[pos] == law.to) {
      ++c.hits;
    }
  }
  return out;
}

void pool_origin(SoundLaw& law) {
  law.scope = 0;
  law.hits = 0;
  for (const auto& [lang, c] : law.per_language) {
    if (!law.origin.empty() && !law.origin.count(lang)) continue;
    law.scope += c.scope;
    law.hits += c.hits;
  }
}

// Evaluates laws[i] for every i in `which`, spread over worker threads. Each
// law is written by exactly one worker, so the result is order-independent.
void evaluate_all(std::vector<SoundLaw>& laws, const AlignedCorpus& corpus, const PhoneFeatureTable& table,
                  std::map<std::string, SiteList, std::less<>>& site_cache) {
  for (const auto& l : laws) {
    if (!site_cache.count(l.from)) site_cache.emplace(l.from, candidate_sites(corpus, l.from));
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < laws.size(); i = next++) {
      laws[i].per_language = count_sites(laws[i], corpus, site_cache.find(laws[i].from)->second, table);
      pool_origin(laws[i]);
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), laws.size() / 64 + 1);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

bool within_set_limit(const SoundLaw& law, std::size_t limit) {
  if (limit == 0) return true;
  auto fits = [&](const std::vector<ContextElement>& ctx) {
    return std::all_of(ctx.begin(), ctx.end(), [&](const ContextElement& e) { return e.phones.size() <= limit; });
  };
  return fits(law.left) && fits(law.right);
}

bool same_element(const ContextElement& a, const ContextElement& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == ContextElement::Kind::Class) return a.feature_class == b.feature_class;
  return a.phones.size() == b.phones.size() && std::is_permutation(a.phones.begin(), a.phones.end(), b.phones.begin());
}

bool phone_like(const ContextElement& e) {
  return e.kind == ContextElement::Kind::Phone || e.kind == ContextElement::Kind::Set ||
         e.kind == ContextElement::Kind::Class;
}

std::vector<std::int8_t> class_of(const ContextElement& e, const PhoneFeatureTable& table) {
  if (e.kind == ContextElement::Kind::Class) return e.feature_class;
  std::vector<std::int8_t> out;
  for (std::size_t k = 0; k < e.phones.size(); ++k) {
    const auto& v = table.encode(e.phones[k]).values;
    if (k == 0) {
      out.assign(v.begin(), v.end());
      for (auto& x : out) {
        if (x == 0) x = ContextElement::kUnspecified;
      }
      continue;
    }
    for (std::size_t f = 0; f < out.size(); ++f) {
      if (out[f] != v[f]) out[f] = ContextElement::kUnspecified;
    }
  }
  return out;
}

ContextElement merge(const ContextElement& a, const ContextElement& b, const PhoneFeatureTable& table,
                     GeneralizationMode mode) {
  if (mode == GeneralizationMode::FeatureClass) {
    auto ca = class_of(a, table);
    const auto cb = class_of(b, table);
    for (std::size_t f = 0; f < ca.size(); ++f) {
      if (ca[f] != cb[f]) ca[f] = ContextElement::kUnspecified;
    }
    return ContextElement{ContextElement::Kind::Class, {}, std::move(ca)};
  }
  ContextElement out{ContextElement::Kind::Set, a.phones, {}};
  for (const auto& p : b.phones) {
    if (std::find(out.phones.begin(), out.phones.end(), p) == out.phones.end()) out.phones.push_back(p);
  }
  return out;
}

std::vector<ContextElement> residue(std::span<const ContextElement> a, std::span<const ContextElement> b) {
  if (a.empty() || b.empty()) return {};
  if (a.size() == 1 && b.size() == 1 && a[0].kind == ContextElement::Kind::Boundary &&
      b[0].kind == ContextElement::Kind::Boundary) {
    return {ContextElement::boundary()};
  }
  return {ContextElement::free()};
}

std::vector<ContextElement> generalize_context(const std::vector<ContextElement>& a,
                                               const std::vector<ContextElement>& b,
                                               const PhoneFeatureTable& table, GeneralizationMode mode) {
  std::vector<ContextElement> out;
  const std::size_t common = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < common && same_element(a[i], b[i])) {
    out.push_back(a[i]);
    if (a[i].kind == ContextElement::Kind::Free) return out;
    ++i;
  }
  if (i == a.size() && i == b.size()) return out;
  if (i < common && phone_like(a[i]) && phone_like(b[i])) {
    out.push_back(merge(a[i], b[i], table, mode));
    ++i;
  }
  const auto rest = residue(std::span(a).subspan(std::min(i, a.size())),
                            std::span(b).subspan(std::min(i, b.size())));
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::string context_text(const std::vector<ContextElement>& ctx, bool reverse,
                         const PhoneFeatureTable* table) {
  std::vector<std::string> parts;
  for (const auto& e : ctx) parts.push_back(e.text(table));
  if (reverse) std::reverse(parts.begin(), parts.end());
  return join(parts, " ");
}

std::string law_text(const SoundLaw& law, std::string_view arrow, const PhoneFeatureTable* table) {
  std::string out = law.from + " " + std::string(arrow) + " " + law.to + " / ";
  const auto l = context_text(law.left, true, table);
  const auto r = context_text(law.right, false, table);
  if (!l.empty()) out += l + " ";
  out += "_";
  if (!r.empty()) out += " " + r;
  return out;
}

bool law_order(const SoundLaw& a, const SoundLaw& b) {
  if (a.from != b.from) return a.from < b.from;
  if (a.to != b.to) return a.to < b.to;
  const double aa = a.accuracy().value_or(0.0);
  const double ab = b.accuracy().value_or(0.0);
  if (aa != ab) return aa > ab;
  return a.key() < b.key();
}

}  // namespace

CognateLoad load_cognates(const std::filesystem::path& path, const PhoneFeatureTable& table) {
  const auto lines = read_lines(path);
  const std::string src = path.string();
  CognateLoad out;
  bool header = false;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trim(lines[i]).empty() || lines[i].front() == '#') continue;
    const auto cells = split(lines[i], '\t');
    if (!header) {
      if (cells.size() != 3 || trim(cells[0]) != "cogid" || trim(cells[1]) != "language" ||
          trim(cells[2]) != "segments") {
        throw ParseError(src, lineno, "expected header cogid<TAB>language<TAB>segments");
      }
      header = true;
      continue;
    }
    if (cells.size() != 3) throw ParseError(src, lineno, "wrong number of cells");
    CognateEntry e{std::string(trim(cells[0])), std::string(trim(cells[1])), {}};
    if (e.cogid.empty() || e.language.empty()) throw ParseError(src, lineno, "empty cogid or language");
    std::string problem;
    for (const auto& seg : split_whitespace(cells[2])) {
      if (!table.contains(seg)) {
        problem = "unknown phone '" + seg + "'";
        break;
      }
      e.segments.push_back(table.canonical(seg));
    }
    if (problem.empty() && e.segments.empty()) problem = "no segments";
    if (problem.empty() && !seen.emplace(e.cogid, e.language).second) {
      problem = "duplicate entry for " + e.cogid + "/" + e.language;
    }
    if (!problem.empty()) {
      out.warnings.push_back(src + ":" + std::to_string(lineno) + ": " + problem + "; entry excluded");
      continue;
    }
    out.entries.push_back(std::move(e));
  }
  if (!header) throw ParseError(src, 0, "empty cognate file");
  if (out.entries.empty()) throw ParseError(src, 0, "no usable cognate entries");
  return out;
}

std::vector<std::string> Alignment::proto_segments() const {
  std::vector<std::string> out;
  for (const auto& c : columns) {
    if (!is_null_phone(c.proto)) out.push_back(c.proto);
  }
  return out;
}

std::vector<std::string> Alignment::daughter_segments() const {
  std::vector<std::string> out;
  for (const auto& c : columns) {
    if (!is_null_phone(c.daughter)) out.push_back(c.daughter);
  }
  return out;
}

Alignment needleman_wunsch(std::span<const std::string> proto, std::span<const std::string> daughter,
                           const PhoneFeatureTable& table, double gap_cost) {
  if (proto.empty() || daughter.empty()) throw Error("alignment needs two nonempty sequences");
  for (const auto& p : proto) table.encode(p);
  for (const auto& d : daughter) table.encode(d);
  const std::size_t m = proto.size();
  const std::size_t n = daughter.size();
  const std::size_t w = n + 1;
  std::vector<double> dp((m + 1) * w, 0.0);
  std::vector<double> sub(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) sub[i * n + j] = fed_aligned(table, proto[i], daughter[j]);
  for (std::size_t i = 1; i <= m; ++i) dp[i * w] = dp[(i - 1) * w] + gap_cost;
  for (std::size_t j = 1; j <= n; ++j) dp[j] = dp[j - 1] + gap_cost;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      dp[i * w + j] = std::min({dp[(i - 1) * w + j - 1] + sub[(i - 1) * n + j - 1],
                                dp[(i - 1) * w + j] + gap_cost, dp[i * w + j - 1] + gap_cost});
    }
  }
  Alignment out;
  out.total_cost = dp[m * w + n];
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    const double here = dp[i * w + j];
    if (i > 0 && j > 0 && here == dp[(i - 1) * w + j - 1] + sub[(i - 1) * n + j - 1]) {
      out.columns.push_back({proto[i - 1], daughter[j - 1]});
      --i;
      --j;
    } else if (i > 0 && here == dp[(i - 1) * w + j] + gap_cost) {
      out.columns.push_back({proto[i - 1], kNull});
      --i;
    } else {
      out.columns.push_back({kNull, daughter[j - 1]});
      --j;
    }
  }
  std::reverse(out.columns.begin(), out.columns.end());
  return out;
}

AlignedForm make_aligned_form(std::string cogid, std::string language, Alignment alignment) {
  AlignedForm f{std::move(cogid), std::move(language), std::move(alignment), {}, {}, {}};
  f.inserted.emplace_back();
  for (const auto& c : f.alignment.columns) {
    if (is_null_phone(c.proto) && is_null_phone(c.daughter)) throw Error("alignment has an empty column");
    if (is_null_phone(c.proto)) {
      f.inserted.back().push_back(c.daughter);
    } else {
      f.proto.push_back(c.proto);
      f.reflex.push_back(c.daughter);
      f.inserted.emplace_back();
    }
  }
  return f;
}

AlignedCorpus align_corpus(const std::vector<CognateEntry>& entries, const PhoneFeatureTable& table) {
  std::map<std::string, const CognateEntry*> protos;
  std::set<std::string> languages;
  for (const auto& e : entries) {
    if (e.language == kProtoLanguage) protos.emplace(e.cogid, &e);
  }
  AlignedCorpus corpus;
  for (const auto& e : entries) {
    if (e.language == kProtoLanguage) continue;
    const auto it = protos.find(e.cogid);
    if (it == protos.end()) {
      corpus.warnings.push_back("cognate set " + e.cogid + " has no protoform; " + e.language +
                                " entry skipped");
      continue;
    }
    languages.insert(e.language);
    corpus.forms.push_back(make_aligned_form(
        e.cogid, e.language, needleman_wunsch(it->second->segments, e.segments, table)));
  }
  if (corpus.forms.empty()) throw Error("no daughter forms could be aligned to a protoform");
  corpus.languages.assign(languages.begin(), languages.end());
  return corpus;
}

bool ContextElement::matches(std::string_view phone, const PhoneFeatureTable& table) const {
  switch (kind) {
    case Kind::Phone:
    case Kind::Set:
      return std::find(phones.begin(), phones.end(), phone) != phones.end();
    case Kind::Class: {
      if (is_null_phone(phone) || !table.contains(phone)) return false;
      const auto& v = table.encode(phone).values;
      for (std::size_t f = 0; f < feature_class.size(); ++f) {
        if (feature_class[f] != kUnspecified && feature_class[f] != v[f]) return false;
      }
      return true;
    }
    case Kind::Boundary:
    case Kind::Free:
      return false;
  }
  return false;
}

std::string ContextElement::text(const PhoneFeatureTable* table) const {
  switch (kind) {
    case Kind::Phone:
      return "(" + phones.front() + ")";
    case Kind::Set:
      return "(" + join(phones, "|") + ")";
    case Kind::Class: {
      std::vector<std::string> parts;
      for (std::size_t f = 0; f < feature_class.size(); ++f) {
        if (feature_class[f] == kUnspecified) continue;
        const std::string name = table ? table->feature_names()[f] : "f" + std::to_string(f);
        parts.push_back((feature_class[f] > 0 ? "+" : feature_class[f] < 0 ? "-" : "0") + name);
      }
      return "[" + join(parts, " ") + "]";
    }
    case Kind::Boundary:
      return "(#)";
    case Kind::Free:
      return "X";
  }
  return {};
}

std::string ContextElement::key() const {
  switch (kind) {
    case Kind::Phone:
    case Kind::Set: {
      auto sorted = phones;
      std::sort(sorted.begin(), sorted.end());
      return (sorted.size() == 1 ? "p:" : "s:") + join(sorted, "|");
    }
    case Kind::Class: {
      std::string out = "c:";
      for (auto v : feature_class) out += static_cast<char>('0' + v + 1);
      return out;
    }
    case Kind::Boundary:
      return "#";
    case Kind::Free:
      return "X";
  }
  return {};
}

std::vector<std::string> SoundLaw::languages() const {
  std::vector<std::string> out;
  for (const auto& [lang, c] : per_language) {
    if (c.hits > 0) out.push_back(lang);
  }
  return out;
}

std::string SoundLaw::pretty(const PhoneFeatureTable* table) const { return law_text(*this, "→", table); }

std::string SoundLaw::key() const {
  std::string out = from + ">" + to + "/";
  for (const auto& e : left) out += e.key() + ",";
  out += "_";
  for (const auto& e : right) out += "," + e.key();
  return out;
}

std::vector<SoundLaw> extract_base_rules(const AlignedForm& form) {
  std::vector<SoundLaw> out;
  const auto& seq = form.proto;
  auto left_of = [&](std::size_t gap) {
    std::vector<ContextElement> ctx;
    for (std::size_t k = gap; k-- > 0;) ctx.push_back(ContextElement::phone(seq[k]));
    ctx.push_back(ContextElement::boundary());
    return ctx;
  };
  auto right_from = [&](std::size_t start) {
    std::vector<ContextElement> ctx;
    for (std::size_t k = start; k < seq.size(); ++k) ctx.push_back(ContextElement::phone(seq[k]));
    ctx.push_back(ContextElement::boundary());
    return ctx;
  };
  std::size_t pos = 0;  // proto phones consumed so far
  for (const auto& c : form.alignment.columns) {
    if (is_null_phone(c.proto)) {
      SoundLaw law{kNull, c.daughter, left_of(pos), right_from(pos), {form.language}, 0, 0, {}};
      out.push_back(std::move(law));
      continue;
    }
    if (c.proto != c.daughter) {
      SoundLaw law{c.proto, c.daughter, left_of(pos), right_from(pos + 1), {form.language}, 0, 0, {}};
      out.push_back(std::move(law));
    }
    ++pos;
  }
  return out;
}

std::map<std::string, SiteCount> law_sites(const SoundLaw& law, const AlignedCorpus& corpus,
                                           const PhoneFeatureTable& table) {
  return count_sites(law, corpus, candidate_sites(corpus, law.from), table);
}

SiteCount law_accuracy(const SoundLaw& law, const AlignedCorpus& corpus, const PhoneFeatureTable& table) {
  SiteCount pooled;
  for (const auto& [lang, c] : law_sites(law, corpus, table)) {
    if (!law.origin.empty() && !law.origin.count(lang)) continue;
    pooled.scope += c.scope;
    pooled.hits += c.hits;
  }
  return pooled;
}

void evaluate_law(SoundLaw& law, const AlignedCorpus& corpus, const PhoneFeatureTable& table) {
  law.per_language = law_sites(law, corpus, table);
  pool_origin(law);
}

bool passes_filter(const SoundLaw& law, const InductionConfig& config) {
  if (config.accuracy == AccuracyMode::Pooled) {
    const auto acc = law.accuracy();
    return acc && *acc > config.threshold;
  }
  for (const auto& lang : law.origin) {
    auto it = law.per_language.find(lang);
    if (it == law.per_language.end() || it->second.scope == 0) continue;
    const double acc = static_cast<double>(it->second.hits) / static_cast<double>(it->second.scope);
    if (acc > config.threshold) return true;
  }
  return false;
}

std::vector<SoundLaw> filter_by_accuracy(std::vector<SoundLaw> laws, const InductionConfig& config) {
  std::erase_if(laws, [&](const SoundLaw& l) { return !passes_filter(l, config); });
  return laws;
}

std::optional<SoundLaw> generalize_pair(const SoundLaw& a, const SoundLaw& b, const PhoneFeatureTable& table,
                                        GeneralizationMode mode) {
  if (a.from != b.from || a.to != b.to) return std::nullopt;
  SoundLaw g;
  g.from = a.from;
  g.to = a.to;
  g.left = generalize_context(a.left, b.left, table, mode);
  g.right = generalize_context(a.right, b.right, table, mode);
  g.origin = a.origin;
  g.origin.insert(b.origin.begin(), b.origin.end());
  return g;
}

std::vector<SoundLaw> minimal_generalize(std::vector<SoundLaw> laws, const AlignedCorpus& corpus,
                                         const PhoneFeatureTable& table, const InductionConfig& config) {
  std::map<std::string, SiteList, std::less<>> site_cache;
  std::vector<SoundLaw> all;
  std::map<std::string, std::size_t> index;
  // Laws sharing a change, as indices into `all`.
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_change;

  std::vector<SoundLaw> unique;
  for (auto& law : laws) {
    const auto key = law.key();
    auto it = index.find(key);
    if (it != index.end()) {
      unique[it->second].origin.insert(law.origin.begin(), law.origin.end());
      continue;
    }
    index.emplace(key, unique.size());
    unique.push_back(std::move(law));
  }
  index.clear();
  evaluate_all(unique, corpus, table, site_cache);
  for (auto& law : filter_by_accuracy(std::move(unique), config)) {
    index.emplace(law.key(), all.size());
    by_change[{law.from, law.to}].push_back(all.size());
    all.push_back(std::move(law));
  }

  // Each law is generalized against every word-specific law, as in
  // incremental minimal generalization; pairing two generalized laws would
  // make the closure grow with the square of its own size every round.
  const std::size_t base_end = all.size();
  std::size_t fresh_begin = 0;
  for (int round = 0; round < config.max_rounds; ++round) {
    const std::size_t fresh_end = all.size();
    if (fresh_begin == fresh_end) break;
    std::vector<SoundLaw> produced;
    std::unordered_set<std::string> produced_keys;
    for (std::size_t i = fresh_begin; i < fresh_end; ++i) {
      for (std::size_t j : by_change.at({all[i].from, all[i].to})) {
        if (j >= base_end) break;
        if (i < base_end && j <= i) continue;  // base pairs once
        auto g = generalize_pair(all[i], all[j], table, config.generalization);
        if (!g || !within_set_limit(*g, config.max_set_size)) continue;
        auto key = g->key();
        if (index.count(key) || !produced_keys.insert(std::move(key)).second) continue;
        produced.push_back(std::move(*g));
      }
    }
    evaluate_all(produced, corpus, table, site_cache);
    fresh_begin = fresh_end;
    for (auto& g : produced) {
      if (!passes_filter(g, config)) continue;
      index.emplace(g.key(), all.size());
      by_change[{g.from, g.to}].push_back(all.size());
      all.push_back(std::move(g));
    }
  }
  std::sort(all.begin(), all.end(), law_order);
  return all;
}

std::vector<SoundLaw> induce_sound_laws(const AlignedCorpus& corpus, const PhoneFeatureTable& table,
                                        const InductionConfig& config) {
  std::vector<SoundLaw> base;
  for (const auto& f : corpus.forms) {
    auto laws = extract_base_rules(f);
    base.insert(base.end(), std::make_move_iterator(laws.begin()), std::make_move_iterator(laws.end()));
  }
  return minimal_generalize(std::move(base), corpus, table, config);
}

BinaryMatrix shared_innovation_matrix(const std::vector<SoundLaw>& laws,
                                      const std::vector<std::string>& languages) {
  BinaryMatrix m;
  m.languages = languages;
  for (std::size_t k = 0; k < laws.size(); ++k) {
    BinaryCharacter c;
    c.id = "law" + std::to_string(k + 1);
    c.languages = languages;
    for (const auto& lang : languages) {
      auto it = laws[k].per_language.find(lang);
      c.values.emplace_back(it != laws[k].per_language.end() && it->second.hits > 0);
    }
    m.characters.push_back(std::move(c));
  }
  return m;
}

BinaryMatrix cognacy_matrix(const std::vector<CognateEntry>& entries) {
  if (entries.empty()) throw Error("no cognate entries");
  std::set<std::string> langs;
  std::map<std::string, std::set<std::string>> present;
  for (const auto& e : entries) {
    if (e.language == kProtoLanguage) continue;
    langs.insert(e.language);
    present[e.cogid].insert(e.language);
  }
  if (langs.empty()) throw Error("no daughter entries");
  BinaryMatrix m;
  m.languages.assign(langs.begin(), langs.end());
  for (const auto& [cogid, have] : present) {
    BinaryCharacter c{cogid, m.languages, {}};
    for (const auto& l : m.languages) c.values.emplace_back(have.count(l) > 0);
    m.characters.push_back(std::move(c));
  }
  return m;
}

CorrespondenceTable export_correspondences(const std::vector<SoundLaw>& laws, const AlignedCorpus& corpus,
                                           const PhoneFeatureTable& table) {
  CorrespondenceTable out;
  out.languages = corpus.languages;
  int next_id = 1;
  for (const auto& law : laws) {
    if (is_null_phone(law.from)) continue;
    std::map<std::string, std::map<std::string, std::size_t>> tallies;
    for (const auto& f : corpus.forms) {
      for (std::size_t i = 0; i < f.proto.size(); ++i) {
        if (f.proto[i] != law.from) continue;
        const long il = static_cast<long>(i);
        if (context_matches(law.left, f.proto, il - 1, -1, table) &&
            context_matches(law.right, f.proto, il + 1, 1, table)) {
          ++tallies[f.language][f.reflex[i]];
        }
      }
    }
    Correspondence c;
    c.id = next_id;
    c.proto = law.from;
    std::size_t observed = 0;
    for (const auto& lang : out.languages) {
      auto it = tallies.find(lang);
      if (it == tallies.end()) {
        c.reflexes.emplace_back(std::nullopt);
        continue;
      }
      const auto best = std::max_element(it->second.begin(), it->second.end(),
                                         [](const auto& a, const auto& b) { return a.second < b.second; });
      c.reflexes.emplace_back(best->first);
      ++observed;
    }
    if (observed < 2) continue;
    out.rows.push_back(std::move(c));
    ++next_id;
  }
  return out;
}

void write_law_dump(std::ostream& out, const std::vector<SoundLaw>& laws, const PhoneFeatureTable* table) {
  for (const auto& law : laws) {
    out << law_text(law, "->", table) << '\t' << law.scope << '\t' << law.hits << '\t'
        << join(law.languages(), ",") << '\n';
  }
}

}  // namespace sctree
