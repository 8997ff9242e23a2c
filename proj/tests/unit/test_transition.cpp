#include <doctest.h>

#include <sstream>

#include "sctree/error.hpp"
#include "sctree/transition.hpp"
#include "unit/support.hpp"

using namespace sctree;

namespace {

IntermediatePath path(std::vector<std::string> phones, std::vector<double> costs = {}) {
  IntermediatePath p{std::move(phones), std::move(costs), 0.0};
  for (double c : p.edge_costs) p.total_cost += c;
  return p;
}

Correspondence corr(std::string proto, std::vector<std::string> reflexes) {
  Correspondence c{1, std::move(proto), {}};
  for (auto& r : reflexes) c.reflexes.emplace_back(std::move(r));
  return c;
}

double cost(const TransitionMatrix& m, std::string_view a, std::string_view b) {
  return m.at(*m.index_of(a), *m.index_of(b));
}

}  // namespace

TEST_SUITE("transition") {

TEST_CASE("single expert path p > f > h") {
  const auto m = build_matrix(corr("p", {"h", "h", "p"}), {path({"p", "f", "h"})}, MatrixMode::ExpertUnitEdges);
  CHECK(m.states == std::vector<std::string>{"f", "h", "p"});
  CHECK(cost(m, "p", "f") == 1.0);
  CHECK(cost(m, "p", "h") == 2.0);
  CHECK(cost(m, "f", "h") == 1.0);
  CHECK(m.penalty == 1000.0 * 2.0);
  CHECK(cost(m, "h", "p") == m.penalty);
  CHECK(cost(m, "f", "p") == m.penalty);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(m.at(i, i) == 0.0);
}

TEST_CASE("two branches through different intermediates") {
  const auto m = build_matrix(corr("k", {"tʃ", "k"}), {path({"k", "kʲ", "tʃ"}), path({"k", "kʰ", "tʃ"})},
                              MatrixMode::ExpertUnitEdges);
  CHECK(m.size() == 4);
  CHECK(cost(m, "k", "tʃ") == 2.0);
  CHECK(cost(m, "kʲ", "kʰ") == m.penalty);
  CHECK(cost(m, "kʰ", "kʲ") == m.penalty);
  CHECK(cost(m, "kʲ", "tʃ") == 1.0);
}

TEST_CASE("path endpoints must match the correspondence") {
  CHECK_THROWS_AS(build_matrix(corr("p", {"h", "p"}), {path({"b", "f", "h"})}, MatrixMode::ExpertUnitEdges),
                  Error);
  CHECK_THROWS_AS(build_matrix(corr("p", {"h", "p"}), {path({"p", "f", "s"})}, MatrixMode::ExpertUnitEdges),
                  Error);
  CHECK_THROWS_AS(build_matrix(corr("p", {"h", "p"}), {}, MatrixMode::ExpertUnitEdges), Error);
  CHECK_THROWS_AS(build_matrix(corr("p", {"h", "p"}), {path({})}, MatrixMode::ExpertUnitEdges), Error);
  // weighted mode needs per-edge costs
  CHECK_THROWS_AS(build_matrix(corr("p", {"h", "p"}), {path({"p", "f", "h"})}, MatrixMode::Weighted), Error);
}

TEST_CASE("a linear path of length L costs i - j along it and penalty against it") {
  for (std::size_t L = 1; L <= 6; ++L) {
    std::vector<std::string> phones;
    for (std::size_t i = 0; i <= L; ++i) phones.push_back(std::string(1, static_cast<char>('a' + i)));
    const auto m = build_matrix(corr("a", {phones.back(), "a"}), {path(phones)}, MatrixMode::ExpertUnitEdges);
    CHECK(m.penalty == 1000.0 * static_cast<double>(L));
    for (std::size_t i = 0; i <= L; ++i) {
      for (std::size_t j = 0; j <= L; ++j) {
        CHECK(m.at(i, j) == (j >= i ? static_cast<double>(j - i) : m.penalty));
      }
    }
  }
}

TEST_CASE("closure is idempotent and satisfies the triangle inequality") {
  const std::vector<IntermediatePath> paths{path({"k", "c", "tʃ"}, {0.4, 0.3}), path({"k", "x", "h"}, {0.7, 0.2}),
                                            path({"k", "c", "ç", "h"}, {0.4, 0.1, 0.1})};
  const auto m = build_matrix(corr("k", {"tʃ", "h", "k"}), paths, MatrixMode::Weighted);
  CHECK(cost(m, "k", "h") == doctest::Approx(0.6));
  CHECK(cost(m, "k", "tʃ") == doctest::Approx(0.7));
  const auto n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) CHECK(m.at(i, j) <= m.at(i, k) + m.at(k, j) + 1e-12);
    }
  }
  // Rebuilding from the closed matrix's finite entries as single edges changes nothing.
  std::vector<IntermediatePath> closed;
  for (std::size_t j = 0; j < n; ++j) {
    if (m.states[j] != "k" && m.at(*m.index_of("k"), j) < m.penalty) {
      closed.push_back(path({"k", m.states[j]}, {m.at(*m.index_of("k"), j)}));
    }
  }
  for (const auto& p : paths) closed.push_back(p);
  const auto again = build_matrix(corr("k", {"tʃ", "h", "k", "c", "x", "ç"}), closed, MatrixMode::Weighted);
  CHECK(again.states == m.states);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) CHECK(again.at(i, j) == doctest::Approx(m.at(i, j)));
  }
}

TEST_CASE("explicit penalty overrides the default") {
  const auto m = build_matrix(corr("p", {"h", "p"}), {path({"p", "h"})}, MatrixMode::ExpertUnitEdges, 50.0);
  CHECK(m.penalty == 50.0);
  CHECK(cost(m, "h", "p") == 50.0);
}

TEST_CASE("weighted penalty scales with the largest finite cost") {
  const auto m = build_matrix(corr("p", {"h", "p"}), {path({"p", "f", "h"}, {2.5, 3.0})}, MatrixMode::Weighted);
  CHECK(cost(m, "p", "h") == 5.5);
  CHECK(m.penalty == 5500.0);
  const auto small = build_matrix(corr("p", {"h", "p"}), {path({"p", "h"}, {0.2})}, MatrixMode::Weighted);
  CHECK(small.penalty == 1000.0);
}

TEST_CASE("load_correspondences parses languages, loss and missing data") {
  testing::TempDir dir("corr");
  const auto f = dir.write("c.tsv",
                           "id\tproto\tA\tB\tC\n"
                           "1\tp\tf\t-\tp\n"
                           "# comment\n"
                           "2\tk\t∅\ttʃ\tk\n");
  const auto t = load_correspondences(f, &testing::features());
  CHECK(t.languages == std::vector<std::string>{"A", "B", "C"});
  REQUIRE(t.rows.size() == 2);
  CHECK_FALSE(t.rows[0].reflexes[1].has_value());
  CHECK(*t.rows[1].reflexes[0] == "∅");
  CHECK(t.rows[1].distinct_reflexes() == std::vector<std::string>{"k", "tʃ", "∅"});
  CHECK(t.find(2).proto == "k");
  CHECK_THROWS_AS(t.find(9), Error);

  std::ostringstream out;
  write_correspondences(out, t);
  const auto back = load_correspondences(dir.write("back.tsv", out.str()), &testing::features());
  CHECK(back.rows.size() == 2);
  CHECK(back.rows[1].reflexes == t.rows[1].reflexes);
}

TEST_CASE("load_correspondences errors name the line") {
  testing::TempDir dir("corr_err");
  auto line_of = [&](const std::string& text) -> std::size_t {
    try {
      load_correspondences(dir.write("bad.tsv", text), &testing::features());
    } catch (const ParseError& e) {
      return e.line();
    }
    return 999;
  };
  CHECK(line_of("id\tproto\tA\tB\n1\tp\tf\n") == 2);
  CHECK(line_of("id\tproto\tA\tB\n1\tp\tf\tp\n1\tk\tk\tk\n") == 3);
  CHECK(line_of("id\tproto\tA\tB\n1\tp\tʘ↓\tp\n") == 2);
  CHECK(line_of("id\tproto\tA\tB\n1\tp\tf\t-\n") == 2);
  CHECK(line_of("proto\tid\tA\tB\n") == 1);
  CHECK(line_of("id\tproto\tA\tB\n") == 0);
}

TEST_CASE("load_expert_paths groups, deduplicates and validates") {
  testing::TempDir dir("expert");
  std::string text;
  for (int id = 1; id <= 33; ++id) {
    text += std::to_string(id) + "\tp\tf\tp>ɸ>f\t2\n";
    if (id % 3 == 0) text += std::to_string(id) + "\tp\tf\tp>ɸ>f\t2\n";
    if (id % 5 == 0) text += std::to_string(id) + "\tp\th\tp>f>h\t2\n";
  }
  const auto groups = load_expert_paths(dir.write("e.tsv", text), testing::features());
  CHECK(groups.size() == 33);
  CHECK(groups.at(3).size() == 1);
  CHECK(groups.at(5).size() == 2);
  CHECK_THROWS_AS(load_expert_paths(dir.write("u.tsv", "1\tp\tf\tp>ʘ↓>f\t2\n"), testing::features()),
                  ParseError);
  const auto shipped = load_expert_paths(testing::kData / "synthetic8" / "expert_paths.tsv", testing::features());
  CHECK(shipped.size() == 13);
}

TEST_CASE("matrix dump is stable") {
  const auto m = build_matrix(corr("p", {"h", "p"}), {path({"p", "h"})}, MatrixMode::ExpertUnitEdges);
  std::ostringstream out;
  write_matrix(out, 7, m);
  CHECK(out.str() ==
        "# correspondence 7 penalty 1000.000000\n"
        "from\\to\th\tp\n"
        "h\t0.000000\t1000.000000\n"
        "p\t1.000000\t0.000000\n");
}

}  // TEST_SUITE
