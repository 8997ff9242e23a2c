#include <doctest.h>

#include <map>
#include <set>

#include "sctree/error.hpp"
#include "sctree/trees.hpp"
#include "unit/oracles.hpp"

using namespace sctree;

namespace {

RootedTree nwk(std::string_view text) { return RootedTree::parse_newick(text); }

std::vector<std::string> labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("L" + std::to_string(100 + i));
  return out;
}

std::size_t choose4(std::size_t n) { return n < 4 ? 0 : n * (n - 1) * (n - 2) * (n - 3) / 24; }

}  // namespace

TEST_SUITE("trees") {

TEST_CASE("parse a small tree") {
  const auto t = nwk("((A,B),C);");
  CHECK(t.leaf_count() == 3);
  CHECK(t.node(t.root()).children.size() == 2);
  CHECK(t.labels() == std::vector<std::string>{"A", "B", "C"});
  CHECK(t.to_newick() == "((A,B),C);");
  CHECK(t.is_binary());
}

TEST_CASE("serialization is canonical") {
  CHECK(nwk("(C,(B,A));").to_newick() == "((A,B),C);");
  CHECK(nwk("  ( (D:0.1,C:2) , [note] (B,A)x )root ;").to_newick() == "((A,B),(C,D));");
  CHECK(nwk("((A,B),C);") == nwk("(C,(B,A));"));
  // unary nodes are suppressed
  CHECK(nwk("(((A,B)),C);").to_newick() == "((A,B),C);");
  CHECK(nwk("('x y',z);").to_newick() == "('x y',z);");
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(nwk("((A,B),(A,C));"), NewickError);
  CHECK_THROWS_AS(nwk("((A,B),C;"), NewickError);
  CHECK_THROWS_AS(nwk("((A,B),C));"), NewickError);
  CHECK_THROWS_AS(nwk(";"), NewickError);
  CHECK_THROWS_AS(nwk(""), NewickError);
  CHECK_THROWS_AS(nwk("((A,B),C)"), NewickError);
  CHECK_THROWS_AS(nwk("((A,B),C); x"), NewickError);
  CHECK_THROWS_AS(nwk("((A,),C);"), NewickError);
  try {
    nwk("((A,B),(A,C));");
  } catch (const NewickError& e) {
    CHECK(e.position() == 8);
    CHECK(std::string(e.what()).find("'A'") != std::string::npos);
  }
}

TEST_CASE("random 21-leaf trees round-trip to a fixed point") {
  Rng rng(21);
  const auto names = labels(21);
  for (int i = 0; i < 20; ++i) {
    const auto t = random_rooted_binary_tree(names, rng);
    CHECK(t.is_binary());
    CHECK(t.leaf_count() == 21);
    const auto text = t.to_newick();
    CHECK(nwk(text).to_newick() == text);
    CHECK(nwk(text) == t);
  }
}

TEST_CASE("quartet examples") {
  const std::array<std::string, 4> q{"A", "B", "C", "D"};
  const auto star = classify_quartet(nwk("(A,B,C,D);"), q);
  CHECK(star.kind == QuartetKind::Star);
  CHECK(star.pairing == 0);

  const auto balanced = classify_quartet(nwk("((A,B),(C,D));"), q);
  CHECK(balanced.kind == QuartetKind::Butterfly);
  CHECK(balanced.pairing == 0b0011);
  CHECK(balanced.describe() == "A B | C D");

  CHECK(classify_quartet(nwk("(((A,B),C),D);"), q).pairing == 0b0011);
  CHECK(classify_quartet(nwk("((A,D),(B,C));"), {"D", "C", "B", "A"}).pairing == 0b1001);
  CHECK(classify_quartet(nwk("(((B,D),A),C);"), q).pairing == 0b0101);

  const auto out = classify_quartet(nwk("((A,B,C),D);"), q);
  CHECK(out.kind == QuartetKind::Butterfly);
  CHECK(out.pairing == 0b1000);
  CHECK(out.describe() == "(A B C) | D");

  CHECK_THROWS_AS(classify_quartet(nwk("(A,B,C,D);"), {"A", "B", "C", "E"}), Error);
  CHECK_THROWS_AS(classify_quartet(nwk("(A,B,C,D);"), {"A", "B", "C", "C"}), Error);
}

TEST_CASE("quartet classes agree with the restrict-and-normalize oracle") {
  Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    const auto n = 4 + rng.below(18);
    const auto names = labels(n);
    // Mix binary trees with consensus-collapsed multifurcating ones.
    const auto a = random_rooted_binary_tree(names, rng);
    const auto b = random_rooted_binary_tree(names, rng);
    const std::vector<RootedTree> trio{a, b, random_rooted_binary_tree(names, rng)};
    for (const auto& tree : {a, majority_consensus(trio)}) {
      for (int k = 0; k < 25; ++k) {
        std::vector<std::string> pick = names;
        rng.shuffle(std::span(pick));
        const std::array<std::string, 4> q{pick[0], pick[1], pick[2], pick[3]};
        const auto cls = classify_quartet(tree, q);
        CHECK(cls.pairing == testing::restricted_quartet_code(tree, q));
        CHECK((cls.kind == QuartetKind::Star) == (cls.pairing == 0));
      }
    }
  }
}

TEST_CASE("gqd examples") {
  const auto gold = nwk("((A,B),(C,D),E);");
  CHECK(gqd(gold, gold) == 0.0);
  CHECK(gqd(nwk("((A,C),(B,D),E);"), gold) == 1.0);
  CHECK(gqd(nwk("(A,B,C,D,E);"), gold) == 1.0);
  CHECK(gqd(nwk("(A,B,C,D,E);"), nwk("(E,D,C,B,A);")) == 0.0);
  CHECK_THROWS_AS(gqd(nwk("(A,B,(C,D));"), nwk("(A,B,(C,X));")), Error);
  CHECK_THROWS_AS(gqd(gold, nwk("(A,B,C,D,E);")), Error);
  try {
    gqd(nwk("(A,B,(C,D));"), nwk("(A,B,(C,X));"));
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("D") != std::string::npos);
    CHECK(msg.find("X") != std::string::npos);
  }
}

TEST_CASE("gqd is bounded, zero on identity and counts partition C(n,4)") {
  Rng rng(9);
  for (int i = 0; i < 30; ++i) {
    const auto n = 4 + rng.below(14);
    const auto names = labels(n);
    const auto a = random_rooted_binary_tree(names, rng);
    const auto b = random_rooted_binary_tree(names, rng);
    CHECK(gqd(a, a) == 0.0);
    const double d = gqd(b, a);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    const auto counts = count_quartets(a);
    CHECK(counts.stars + counts.butterflies == choose4(n));
    // binary trees have no stars
    CHECK(counts.stars == 0);
    const std::vector<RootedTree> pair{a, b};
    const auto c = count_quartets(majority_consensus(pair));
    CHECK(c.stars + c.butterflies == choose4(n));
  }
  const auto flat = nwk("(A,B,C,D,E,F);");
  CHECK(count_quartets(flat).butterflies == 0);
  CHECK(count_quartets(flat).stars == 15);
}

TEST_CASE("consensus examples") {
  const std::vector<RootedTree> one{nwk("((A,B),(C,D));")};
  CHECK(majority_consensus(one) == one[0]);

  const std::vector<RootedTree> three{nwk("((A,B),C);"), nwk("((A,C),B);"), nwk("((A,B),C);")};
  CHECK(majority_consensus(three).to_newick() == "((A,B),C);");

  const std::vector<RootedTree> split{nwk("((A,B),(C,D));"), nwk("((A,C),(B,D));")};
  CHECK(majority_consensus(split).to_newick() == "(A,B,C,D);");

  CHECK(majority_consensus(three, 0.7).to_newick() == "(A,B,C);");
  CHECK_THROWS_AS(majority_consensus(three, 1.0), Error);
  CHECK_THROWS_AS(majority_consensus(three, 0.4), Error);
  CHECK_THROWS_AS(majority_consensus({}), Error);
  const std::vector<RootedTree> mismatch{nwk("((A,B),C);"), nwk("((A,B),D);")};
  CHECK_THROWS_AS(majority_consensus(mismatch), Error);
}

TEST_CASE("every consensus clade recounts above the threshold") {
  Rng rng(17);
  const auto names = labels(9);
  for (double threshold : {0.5, 0.6, 0.8}) {
    for (int round = 0; round < 10; ++round) {
      // Perturb one base tree so clades are shared at varied frequencies.
      const auto base = random_rooted_binary_tree(names, rng);
      std::vector<RootedTree> trees;
      for (int k = 0; k < 7; ++k) {
        trees.push_back(rng.below(3) ? base : random_rooted_binary_tree(names, rng));
      }
      const auto cons = majority_consensus(trees, threshold);
      std::map<LeafSet, std::size_t> counts;
      for (const auto& t : trees) {
        for (const auto& c : t.clades()) ++counts[c];
      }
      std::set<LeafSet> kept;
      for (const auto& c : cons.clades()) {
        kept.insert(c);
        CHECK(static_cast<double>(counts[c]) > threshold * static_cast<double>(trees.size()));
      }
      for (const auto& [c, n] : counts) {
        if (static_cast<double>(n) > threshold * static_cast<double>(trees.size())) CHECK(kept.count(c) == 1);
      }
    }
  }
}

TEST_CASE("topology enumeration counts") {
  const auto four = labels(4);
  const auto five = labels(5);
  CHECK(all_rooted_binary_trees(four).size() == 15);
  CHECK(all_rooted_trees(four).size() == 26);
  CHECK(all_rooted_trees(five).size() == 236);
  CHECK(all_rooted_binary_trees(five).size() == 105);
  std::set<std::string> distinct;
  for (const auto& t : all_rooted_trees(five)) distinct.insert(t.to_newick());
  CHECK(distinct.size() == 236);
}

TEST_CASE("random binary trees are roughly uniform over topologies") {
  Rng rng(3);
  const auto four = labels(4);
  std::map<std::string, int> hist;
  const int draws = 15000;
  for (int i = 0; i < draws; ++i) ++hist[random_rooted_binary_tree(four, rng).to_newick()];
  CHECK(hist.size() == 15);
  for (const auto& [t, n] : hist) {
    CHECK(n > 800);
    CHECK(n < 1200);
  }
}

TEST_CASE("from_clades builds and rejects incompatible sets") {
  const auto t = RootedTree::from_clades({"A", "B", "C", "D"}, {{"A", "B"}, {"A", "B", "C"}});
  CHECK(t.to_newick() == "(((A,B),C),D);");
  CHECK_THROWS_AS(RootedTree::from_clades({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}), Error);
  CHECK_THROWS_AS(RootedTree::from_clades({"A", "B"}, {{"A", "Z"}}), Error);
}

TEST_CASE("ascii rendering is an indented outline") {
  CHECK(nwk("((A,B),C);").render_ascii() ==
        "+\n"
        "|-- +\n"
        "|   |-- A\n"
        "|   `-- B\n"
        "`-- C\n");
}

}  // TEST_SUITE
