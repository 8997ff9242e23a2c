#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "sctree/asli.hpp"
#include "sctree/error.hpp"
#include "unit/oracles.hpp"
#include "unit/support.hpp"

using namespace sctree;
using testing::features;

namespace {

using Segs = std::vector<std::string>;

Alignment align(const Segs& a, const Segs& b) { return needleman_wunsch(a, b, features()); }

AlignedCorpus corpus_of(const std::vector<CognateEntry>& entries) { return align_corpus(entries, features()); }

SoundLaw law(std::string from, std::string to, std::vector<ContextElement> left, std::vector<ContextElement> right,
             std::set<std::string> origin = {}) {
  return SoundLaw{std::move(from), std::move(to), std::move(left), std::move(right), std::move(origin), 0, 0, {}};
}

ContextElement ph(std::string p) { return ContextElement::phone(std::move(p)); }

}  // namespace

TEST_SUITE("asli") {

TEST_CASE("load_cognates excludes bad rows with warnings") {
  testing::TempDir dir("cog");
  const auto f = dir.write("c.tsv",
                           "cogid\tlanguage\tsegments\n"
                           "c1\tPROTO\tt a\n"
                           "c1\tA\td a\n"
                           "c1\tB\tʘ↓ a\n"
                           "c1\tC\t \n"
                           "c1\tA\tt a\n");
  const auto load = load_cognates(f, features());
  CHECK(load.entries.size() == 2);
  REQUIRE(load.warnings.size() == 3);
  CHECK(load.warnings[0].find(":4:") != std::string::npos);
  CHECK(load.warnings[0].find("ʘ↓") != std::string::npos);
  CHECK(load.warnings[1].find(":5:") != std::string::npos);
  CHECK(load.warnings[2].find("duplicate") != std::string::npos);
  CHECK_THROWS_AS(load_cognates(dir.write("h.tsv", "id\tlang\tsegs\n"), features()), ParseError);
  CHECK_THROWS_AS(load_cognates(dir.write("e.tsv", "cogid\tlanguage\tsegments\nc1\tA\tʘ↓\n"), features()),
                  ParseError);
}

TEST_CASE("alignment examples") {
  const auto ta = align({"t", "a"}, {"d", "a"});
  CHECK(ta.columns == std::vector<AlignmentColumn>{{"t", "d"}, {"a", "a"}});
  CHECK(ta.total_cost == doctest::Approx(fed(features(), "t", "d")));

  CHECK(fed(features(), "p", "m") < 2.0);
  const auto pm = align({"p", "o", "a"}, {"m", "o", "a"});
  CHECK(pm.columns.front() == AlignmentColumn{"p", "m"});
  CHECK(pm.columns.size() == 3);

  const auto tan = align({"t", "a"}, {"t", "a", "n"});
  CHECK(tan.columns == std::vector<AlignmentColumn>{{"t", "t"}, {"a", "a"}, {"∅", "n"}});
  CHECK(tan.total_cost == 1.0);

  CHECK_THROWS_AS(align({}, {"a"}), Error);
  CHECK_THROWS_AS(align({"ʘ↓"}, {"a"}), UnknownPhoneError);
}

TEST_CASE("alignment is optimal and reconstructs both sequences") {
  Rng rng(41);
  const Segs alphabet{"p", "b", "t", "a", "i", "m", "s", "ŋ", "o"};
  for (int trial = 0; trial < 200; ++trial) {
    Segs a, b;
    for (std::size_t i = 0, n = 1 + rng.below(5); i < n; ++i) a.push_back(alphabet[rng.below(alphabet.size())]);
    for (std::size_t i = 0, n = 1 + rng.below(5); i < n; ++i) b.push_back(alphabet[rng.below(alphabet.size())]);
    const auto al = align(a, b);
    CHECK(al.total_cost == doctest::Approx(testing::alignment_cost(a, b, features(), 1.0)));
    CHECK(al.proto_segments() == a);
    CHECK(al.daughter_segments() == b);
    double sum = 0.0;
    for (const auto& c : al.columns) {
      CHECK_FALSE((is_null_phone(c.proto) && is_null_phone(c.daughter)));
      sum += is_null_phone(c.proto) || is_null_phone(c.daughter) ? 1.0 : fed_aligned(features(), c.proto, c.daughter);
    }
    CHECK(sum == doctest::Approx(al.total_cost));
  }
}

TEST_CASE("base rules carry full contexts with boundaries") {
  const auto form = make_aligned_form("c1", "A", align({"t", "a"}, {"d", "a"}));
  const auto laws = extract_base_rules(form);
  REQUIRE(laws.size() == 1);
  CHECK(laws[0].pretty() == "t → d / (#) _ (a) (#)");
  CHECK(laws[0].origin == std::set<std::string>{"A"});

  CHECK(extract_base_rules(make_aligned_form("c1", "A", align({"t", "a"}, {"t", "a"}))).empty());

  const auto ins = extract_base_rules(make_aligned_form("c1", "A", align({"t", "a"}, {"t", "a", "n"})));
  REQUIRE(ins.size() == 1);
  CHECK(ins[0].pretty() == "∅ → n / (#) (t) (a) _ (#)");

  const auto del = extract_base_rules(make_aligned_form("c1", "A", align({"t", "a", "n"}, {"t", "a"})));
  REQUIRE(del.size() == 1);
  CHECK(del[0].pretty() == "n → ∅ / (#) (t) (a) _ (#)");
}

TEST_CASE("three matching sites with two agreeing daughters are retained") {
  const auto corpus = corpus_of({{"c1", "PROTO", {"t", "a"}}, {"c1", "L", {"d", "a"}},
                                 {"c2", "PROTO", {"t", "a"}}, {"c2", "L", {"d", "a"}},
                                 {"c3", "PROTO", {"t", "a"}}, {"c3", "L", {"t", "a"}},
                                 {"c4", "PROTO", {"t", "i"}}, {"c4", "L", {"t", "i"}}});
  auto base = extract_base_rules(corpus.forms[0]);
  REQUIRE(base.size() == 1);
  const auto acc = law_accuracy(base[0], corpus, features());
  CHECK(acc.scope == 3);
  CHECK(acc.hits == 2);
  evaluate_law(base[0], corpus, features());
  CHECK(passes_filter(base[0], {}));
  CHECK(filter_by_accuracy(base, {}).size() == 1);
  InductionConfig strict;
  strict.threshold = 2.0 / 3.0;  // strict inequality drops exactly 2/3
  CHECK_FALSE(passes_filter(base[0], strict));
}

TEST_CASE("a change unique in the corpus supports itself") {
  const auto corpus = corpus_of({{"c1", "PROTO", {"p", "o", "a"}}, {"c1", "L", {"m", "o", "a"}},
                                 {"c2", "PROTO", {"p", "i"}}, {"c2", "L", {"p", "i"}}});
  auto base = extract_base_rules(corpus.forms[0]);
  REQUIRE(base.size() == 1);
  evaluate_law(base[0], corpus, features());
  CHECK(base[0].scope == 1);
  CHECK(base[0].hits == 1);
  CHECK(base[0].accuracy() == 1.0);
}

TEST_CASE("the nasalization pair generalizes to a two-phone set") {
  const auto a = law("e", "ẽ", {ph("n")}, {});
  const auto b = law("e", "ẽ", {ph("m")}, {});
  const auto g = generalize_pair(a, b, features(), GeneralizationMode::Set);
  REQUIRE(g);
  CHECK(g->pretty() == "e → ẽ / (n|m) _");
  CHECK_FALSE(generalize_pair(a, law("e", "i", {ph("m")}, {}), features(), GeneralizationMode::Set));

  const auto cls = generalize_pair(a, b, features(), GeneralizationMode::FeatureClass);
  REQUIRE(cls);
  REQUIRE(cls->left.size() == 1);
  const auto& el = cls->left[0];
  CHECK(el.kind == ContextElement::Kind::Class);
  CHECK(el.matches("n", features()));
  CHECK(el.matches("m", features()));
  CHECK_FALSE(el.matches("t", features()));
  CHECK_FALSE(el.matches("a", features()));
  CHECK(el.text(&features()).find("+nas") != std::string::npos);
}

TEST_CASE("context beyond the first mismatch collapses to a free variable") {
  const auto a = law("t", "d", {ph("a"), ph("k"), ContextElement::boundary()}, {ph("a"), ContextElement::boundary()});
  const auto b = law("t", "d", {ph("a"), ph("s"), ph("i"), ContextElement::boundary()},
                     {ph("a"), ContextElement::boundary()});
  const auto g = generalize_pair(a, b, features(), GeneralizationMode::Set);
  REQUIRE(g);
  CHECK(g->pretty() == "t → d / X (k|s) (a) _ (a) (#)");
  const auto c = law("t", "d", {ph("i"), ContextElement::boundary()}, {ph("a"), ContextElement::boundary()});
  const auto h = generalize_pair(a, c, features(), GeneralizationMode::Set);
  REQUIRE(h);
  CHECK(h->pretty() == "t → d / X (a|i) _ (a) (#)");
  // both sides end at the word edge right after the mismatch
  const auto d = law("t", "d", {ph("u"), ContextElement::boundary()}, {ph("a"), ContextElement::boundary()});
  CHECK(generalize_pair(c, d, features(), GeneralizationMode::Set)->pretty() == "t → d / (#) (i|u) _ (a) (#)");
}

TEST_CASE("generalized laws cover every site of their parents") {
  Rng rng(42);
  const auto corpus = corpus_of(testing::random_cognates(rng, 30));
  std::vector<SoundLaw> base;
  for (const auto& f : corpus.forms) {
    for (auto& l : extract_base_rules(f)) base.push_back(std::move(l));
  }
  std::size_t checked = 0;
  for (auto mode : {GeneralizationMode::Set, GeneralizationMode::FeatureClass}) {
    for (std::size_t i = 0; i < base.size() && checked < 400; ++i) {
      for (std::size_t j = i + 1; j < base.size() && checked < 400; ++j) {
        const auto g = generalize_pair(base[i], base[j], features(), mode);
        if (!g) continue;
        ++checked;
        // Generalizing a generalized law keeps growing the site set.
        const auto gg = generalize_pair(*g, base[(i + j) % base.size()], features(), mode);
        for (const auto& f : corpus.forms) {
          const auto sites = testing::law_site_positions(*g, f, features());
          for (const auto* parent : {&base[i], &base[j]}) {
            for (auto s : testing::law_site_positions(*parent, f, features())) CHECK(sites.count(s) == 1);
          }
          if (gg) {
            const auto wider = testing::law_site_positions(*gg, f, features());
            for (auto s : sites) CHECK(wider.count(s) == 1);
          }
        }
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("site counts agree with the site oracle") {
  Rng rng(43);
  const auto corpus = corpus_of(testing::random_cognates(rng, 25));
  for (const auto& f : corpus.forms) {
    for (const auto& l : extract_base_rules(f)) {
      std::map<std::string, SiteCount> expect;
      for (const auto& g : corpus.forms) {
        for (auto s : testing::law_site_positions(l, g, features())) {
          auto& c = expect[g.language];
          ++c.scope;
          if (is_null_phone(l.from)) {
            c.hits += std::count(g.inserted[s].begin(), g.inserted[s].end(), l.to) > 0;
          } else {
            c.hits += g.reflex[s] == l.to;
          }
        }
      }
      const auto got = law_sites(l, corpus, features());
      REQUIRE(got.size() == expect.size());
      for (const auto& [lang, c] : expect) {
        CHECK(got.at(lang).scope == c.scope);
        CHECK(got.at(lang).hits == c.hits);
      }
    }
  }
}

TEST_CASE("no law at or below the accuracy threshold survives induction") {
  Rng rng(44);
  for (int trial = 0; trial < 4; ++trial) {
    const auto corpus = corpus_of(testing::random_cognates(rng, 20));
    for (auto mode : {AccuracyMode::Pooled, AccuracyMode::PerLanguage}) {
      InductionConfig cfg;
      cfg.accuracy = mode;
      const auto laws = induce_sound_laws(corpus, features(), cfg);
      CHECK_FALSE(laws.empty());
      for (const auto& l : laws) {
        CHECK(l.hits <= l.scope);
        CHECK(passes_filter(l, cfg));
        if (mode == AccuracyMode::Pooled) CHECK(*l.accuracy() > 0.6);
        CHECK(l.from != l.to);
        auto fresh = l;
        evaluate_law(fresh, corpus, features());
        CHECK(fresh.scope == l.scope);
        CHECK(fresh.hits == l.hits);
      }
      for (std::size_t i = 1; i < laws.size(); ++i) {
        CHECK(std::pair(laws[i - 1].from, laws[i - 1].to) <= std::pair(laws[i].from, laws[i].to));
      }
    }
  }
}

TEST_CASE("minimal generalization edge cases") {
  const auto corpus = corpus_of({{"c1", "PROTO", {"n", "e"}}, {"c1", "L", {"n", "ẽ"}},
                                 {"c2", "PROTO", {"m", "e"}}, {"c2", "L", {"m", "ẽ"}},
                                 {"c3", "PROTO", {"t", "e"}}, {"c3", "L", {"t", "e"}}});
  const auto single = minimal_generalize({law("e", "ẽ", {ph("n")}, {}, {"L"})}, corpus, features());
  REQUIRE(single.size() == 1);
  CHECK(single[0].pretty() == "e → ẽ / (n) _");

  const auto differ =
      minimal_generalize({law("e", "ẽ", {ph("n")}, {}, {"L"}), law("t", "d", {}, {ph("e")}, {"L"})}, corpus, features());
  CHECK(differ.size() == 1);  // t -> d never fires

  const auto pair =
      minimal_generalize({law("e", "ẽ", {ph("n")}, {}, {"L"}), law("e", "ẽ", {ph("m")}, {}, {"L"})}, corpus, features());
  std::vector<std::string> texts;
  for (const auto& l : pair) texts.push_back(l.pretty());
  CHECK(std::find(texts.begin(), texts.end(), "e → ẽ / (n|m) _") != texts.end());
  CHECK(texts.size() == 3);

  // duplicates merge their origins
  const auto dup = minimal_generalize({law("e", "ẽ", {ph("n")}, {}, {"L"}), law("e", "ẽ", {ph("n")}, {}, {"M"})},
                                      corpus, features());
  REQUIRE(dup.size() == 1);
  CHECK(dup[0].origin == std::set<std::string>{"L", "M"});
}

TEST_CASE("induction is deterministic and honors the set-size cap") {
  Rng rng(45);
  const auto corpus = corpus_of(testing::random_cognates(rng, 30));
  const auto a = induce_sound_laws(corpus, features());
  const auto b = induce_sound_laws(corpus, features());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].key() == b[i].key());
    CHECK(a[i].per_language.size() == b[i].per_language.size());
  }
  for (const auto& l : a) {
    for (const auto* ctx : {&l.left, &l.right}) {
      for (const auto& e : *ctx) CHECK(e.phones.size() <= 2);
    }
  }
  std::ostringstream one, two;
  write_law_dump(one, a);
  write_law_dump(two, b);
  CHECK(one.str() == two.str());
}

TEST_CASE("law dump format") {
  auto l = law("t", "d", {ContextElement::boundary()}, {ph("a"), ContextElement::boundary()}, {"Kue"});
  l.scope = 3;
  l.hits = 2;
  l.per_language = {{"Kue", {3, 2}}, {"Tan", {1, 0}}};
  std::ostringstream out;
  write_law_dump(out, {l});
  CHECK(out.str() == "t -> d / (#) _ (a) (#)\t3\t2\tKue\n");
}

TEST_CASE("shared innovation and cognacy matrices") {
  auto l = law("t", "d", {}, {});
  l.per_language = {{"Kue", {2, 2}}, {"Tan", {3, 0}}};
  const auto m = shared_innovation_matrix({l}, {"Kue", "Sio", "Tan"});
  REQUIRE(m.characters.size() == 1);
  CHECK(m.characters[0].values == std::vector<std::optional<bool>>{true, false, false});
  CHECK(shared_innovation_matrix({}, {"Kue"}).characters.empty());

  const std::vector<CognateEntry> entries{{"c1", "PROTO", {"a"}}, {"c1", "A", {"a"}}, {"c1", "B", {"a"}},
                                          {"c2", "A", {"a"}}, {"c3", "A", {"a"}}, {"c3", "B", {"a"}}};
  const auto cog = cognacy_matrix(entries);
  CHECK(cog.languages == std::vector<std::string>{"A", "B"});
  REQUIRE(cog.characters.size() == 3);
  for (const auto& c : cog.characters) CHECK(*c.values[0]);
  CHECK_FALSE(*cog.characters[1].values[1]);
  CHECK_THROWS_AS(cognacy_matrix({}), Error);
}

TEST_CASE("synthetic cognate file has one column per set") {
  const auto load = load_cognates(testing::kData / "synthetic8" / "cognates.tsv", features());
  CHECK(load.warnings.empty());
  const auto cog = cognacy_matrix(load.entries);
  CHECK(cog.characters.size() == 40);
  CHECK(cog.languages.size() == 8);
}

TEST_CASE("correspondence export uses the majority reflex at law sites") {
  const auto corpus = corpus_of({{"c1", "PROTO", {"t", "a"}}, {"c1", "A", {"d", "a"}}, {"c1", "B", {"t", "a"}},
                                 {"c2", "PROTO", {"t", "a", "t", "a"}}, {"c2", "A", {"d", "a", "d", "a"}},
                                 {"c2", "B", {"t", "a", "d", "a"}}, {"c3", "PROTO", {"t", "a"}}, {"c3", "B", {"t", "a"}}});
  auto l = law("t", "d", {}, {ph("a")}, {"A"});
  evaluate_law(l, corpus, features());
  const auto ins = law("∅", "n", {}, {});
  const auto t = export_correspondences({l, ins}, corpus, features());
  REQUIRE(t.rows.size() == 1);
  CHECK(t.languages == std::vector<std::string>{"A", "B"});
  CHECK(t.rows[0].proto == "t");
  CHECK(*t.rows[0].reflexes[0] == "d");
  CHECK(*t.rows[0].reflexes[1] == "t");
}

}  // TEST_SUITE
