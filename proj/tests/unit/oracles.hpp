#pragma once

// Slow, obviously-correct reference implementations used to cross-check the
// library. Shared by the unit suites and the acceptance binary.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sctree/asli.hpp"
#include "sctree/parsimony.hpp"
#include "sctree/phonology.hpp"
#include "sctree/random.hpp"
#include "sctree/trees.hpp"

namespace testing {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense digraph with small integer weights (ties are common) and ~40% of
// off-diagonal edges missing.
inline std::vector<std::vector<double>> random_digraph(std::size_t n, sctree::Rng& rng) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, kInf));
  for (std::size_t u = 0; u < n; ++u) {
    m[u][u] = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (u != v && rng.uniform01() < 0.6) m[u][v] = static_cast<double>(1 + rng.below(5));
    }
  }
  return m;
}

struct SimplePath {
  std::vector<std::size_t> nodes;
  double cost = 0.0;
};

// Every loopless s-t path, sorted by cost then node sequence.
inline std::vector<SimplePath> all_simple_paths(const std::vector<std::vector<double>>& m, std::size_t s,
                                                std::size_t t) {
  std::vector<SimplePath> out;
  std::vector<std::size_t> stack{s};
  std::vector<bool> used(m.size(), false);
  used[s] = true;
  std::function<void(double)> walk = [&](double cost) {
    const auto u = stack.back();
    if (u == t) {
      out.push_back({stack, cost});
      return;
    }
    for (std::size_t v = 0; v < m.size(); ++v) {
      if (used[v] || std::isinf(m[u][v])) continue;
      used[v] = true;
      stack.push_back(v);
      walk(cost + m[u][v]);
      stack.pop_back();
      used[v] = false;
    }
  };
  walk(0.0);
  std::sort(out.begin(), out.end(), [](const SimplePath& a, const SimplePath& b) {
    return a.cost != b.cost ? a.cost < b.cost : a.nodes < b.nodes;
  });
  return out;
}

// Restrict the tree to four leaves, keep the clades they induce and read off
// the rooted class directly. Returns the pairing code convention of QuartetClass.
inline std::uint8_t restricted_quartet_code(const sctree::RootedTree& tree, std::array<std::string, 4> labels) {
  std::sort(labels.begin(), labels.end());
  std::vector<unsigned> below(tree.nodes().size(), 0);
  for (int v : tree.postorder()) {
    const auto& node = tree.node(v);
    if (node.is_leaf()) {
      for (unsigned i = 0; i < 4; ++i) {
        if (node.label == labels[i]) below[static_cast<std::size_t>(v)] = 1U << i;
      }
    } else {
      for (int c : node.children) below[static_cast<std::size_t>(v)] |= below[static_cast<std::size_t>(c)];
    }
  }
  std::set<unsigned> clades;  // restricted clades of size 2 or 3; unary nodes collapse into these
  for (unsigned m : below) {
    if (std::popcount(m) == 2 || std::popcount(m) == 3) clades.insert(m);
  }
  unsigned pair = 0, triple = 0;
  for (unsigned m : clades) (std::popcount(m) == 2 ? pair : triple) = m;
  if (pair) return static_cast<std::uint8_t>((pair & 1U) ? pair : (0xFU & ~pair));
  if (triple) return static_cast<std::uint8_t>(0xFU & ~triple);
  return 0;
}

// Minimum Sankoff cost by enumerating every state of every internal node (and
// missing leaf).
inline double brute_sankoff(const sctree::RootedTree& tree, const sctree::SankoffCharacter& c,
                            sctree::RootMode root_mode) {
  const auto S = c.matrix.size();
  const auto& nodes = tree.nodes();
  std::vector<int> free_nodes;
  std::vector<std::size_t> state(nodes.size(), 0);
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v].is_leaf()) {
      std::optional<std::string> obs;
      for (std::size_t i = 0; i < c.languages.size(); ++i) {
        if (c.languages[i] == nodes[v].label) obs = c.observed[i];
      }
      if (obs) {
        state[v] = *c.matrix.index_of(*obs);
        continue;
      }
    } else if (static_cast<int>(v) == tree.root() && root_mode == sctree::RootMode::Fixed) {
      state[v] = *c.matrix.index_of(c.root_state);
      continue;
    }
    free_nodes.push_back(static_cast<int>(v));
  }
  double best = kInf;
  std::function<void(std::size_t)> assign = [&](std::size_t i) {
    if (i == free_nodes.size()) {
      double total = 0.0;
      for (std::size_t v = 0; v < nodes.size(); ++v) {
        for (int ch : nodes[v].children) total += c.matrix.at(state[v], state[static_cast<std::size_t>(ch)]);
      }
      best = std::min(best, total);
      return;
    }
    for (std::size_t s = 0; s < S; ++s) {
      state[static_cast<std::size_t>(free_nodes[i])] = s;
      assign(i + 1);
    }
  };
  assign(0);
  return best;
}

// Minimum global alignment cost by trying every monotone alignment. Costs are
// summed left to right so the result is comparable bit for bit.
inline double alignment_cost(const std::vector<std::string>& a, const std::vector<std::string>& b,
                             const sctree::PhoneFeatureTable& table, double gap) {
  double best = kInf;
  std::function<void(std::size_t, std::size_t, double)> go = [&](std::size_t i, std::size_t j, double acc) {
    if (i == a.size() && j == b.size()) {
      best = std::min(best, acc);
      return;
    }
    if (i < a.size() && j < b.size()) go(i + 1, j + 1, acc + sctree::fed_aligned(table, a[i], b[j]));
    if (i < a.size()) go(i + 1, j, acc + gap);
    if (j < b.size()) go(i, j + 1, acc + gap);
  };
  go(0, 0, 0.0);
  return best;
}

// Positions of `form` where the law's change and both contexts apply. For
// insertions the position is the gap index.
inline std::set<std::size_t> law_site_positions(const sctree::SoundLaw& law, const sctree::AlignedForm& form,
                                                const sctree::PhoneFeatureTable& table) {
  using Kind = sctree::ContextElement::Kind;
  const auto& seq = form.proto;
  const long n = static_cast<long>(seq.size());
  auto fits = [&](const std::vector<sctree::ContextElement>& ctx, long pos, long step) {
    for (const auto& e : ctx) {
      if (e.kind == Kind::Free) return true;
      if (e.kind == Kind::Boundary) {
        if (pos != -1 && pos != n) return false;
      } else if (pos < 0 || pos >= n || !e.matches(seq[static_cast<std::size_t>(pos)], table)) {
        return false;
      }
      pos += step;
    }
    return true;
  };
  std::set<std::size_t> out;
  const bool insertion = sctree::is_null_phone(law.from);
  for (long p = 0; p <= n; ++p) {
    if (!insertion && (p == n || seq[static_cast<std::size_t>(p)] != law.from)) continue;
    if (fits(law.left, p - 1, -1) && fits(law.right, insertion ? p : p + 1, 1)) out.insert(static_cast<std::size_t>(p));
  }
  return out;
}


// Proto words over a small alphabet; three daughters with regular changes
// plus a little noise.
inline std::vector<sctree::CognateEntry> random_cognates(sctree::Rng& rng, std::size_t sets) {
  const std::vector<std::string> alphabet{"p", "t", "k", "a", "i", "u", "n", "m", "s"};
  std::vector<sctree::CognateEntry> out;
  for (std::size_t c = 0; c < sets; ++c) {
    const std::string id = "c" + std::to_string(c);
    std::vector<std::string> proto;
    const auto len = 2 + rng.below(4);
    for (std::size_t i = 0; i < len; ++i) proto.push_back(alphabet[rng.below(alphabet.size())]);
    out.push_back({id, "PROTO", proto});
    for (const std::string lang : {"L1", "L2", "L3"}) {
      std::vector<std::string> d;
      for (std::size_t i = 0; i < proto.size(); ++i) {
        auto s = proto[i];
        const bool before_a = i + 1 < proto.size() && proto[i + 1] == "a";
        if (lang != "L3" && s == "t" && before_a && rng.below(5)) s = "d";
        if (lang == "L1" && s == "p") s = "f";
        if (lang == "L2" && s == "k" && rng.below(3)) s = "tʃ";
        if (rng.below(12) == 0) s = alphabet[rng.below(alphabet.size())];
        if (lang == "L3" && s == "n" && i + 1 == proto.size()) continue;
        d.push_back(s);
      }
      if (d.empty()) d.push_back("a");
      out.push_back({id, lang, d});
    }
  }
  return out;
}

}  // namespace testing
