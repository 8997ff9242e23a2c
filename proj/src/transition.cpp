#include "sctree/transition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sctree/error.hpp"
#include "sctree/text.hpp"

namespace sctree {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPenaltyScale = 1000.0;
}  // namespace

std::vector<std::string> Correspondence::distinct_reflexes() const {
  std::set<std::string> s;
  for (const auto& r : reflexes) {
    if (r) s.insert(*r);
  }
  return {s.begin(), s.end()};
}

const Correspondence& CorrespondenceTable::find(int id) const {
  for (const auto& r : rows) {
    if (r.id == id) return r;
  }
  throw Error("no correspondence with id " + std::to_string(id));
}

CorrespondenceTable load_correspondences(const std::filesystem::path& path,
                                         const PhoneFeatureTable* table) {
  const auto lines = read_lines(path);
  const std::string src = path.string();
  CorrespondenceTable out;
  bool have_header = false;
  std::set<int> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trim(lines[i]).empty() || lines[i].front() == '#') continue;
    auto cells = split(lines[i], '\t');
    if (!have_header) {
      if (cells.size() < 4 || trim(cells[0]) != "id" || trim(cells[1]) != "proto") {
        throw ParseError(src, lineno, "expected header id<TAB>proto<TAB><languages...>");
      }
      for (std::size_t c = 2; c < cells.size(); ++c) out.languages.emplace_back(trim(cells[c]));
      have_header = true;
      continue;
    }
    if (cells.size() != out.languages.size() + 2) {
      throw ParseError(src, lineno, "wrong number of cells");
    }
    auto canon = [&](std::string_view cell) {
      std::string ph(trim(cell));
      if (table && !is_null_phone(ph)) {
        if (!table->contains(ph)) throw ParseError(src, lineno, "unknown phone '" + ph + "'");
        ph = table->canonical(ph);
      }
      return ph;
    };
    Correspondence c;
    try {
      c.id = std::stoi(cells[0]);
    } catch (const std::exception&) {
      throw ParseError(src, lineno, "bad id '" + cells[0] + "'");
    }
    if (!seen.insert(c.id).second) {
      throw ParseError(src, lineno, "duplicate correspondence id " + std::to_string(c.id));
    }
    c.proto = canon(cells[1]);
    if (c.proto.empty() || c.proto == "-" || is_null_phone(c.proto)) {
      throw ParseError(src, lineno, "correspondence needs a proto phone");
    }
    std::size_t observed = 0;
    for (std::size_t k = 2; k < cells.size(); ++k) {
      const auto cell = trim(cells[k]);
      if (cell == "-" || cell.empty()) {
        c.reflexes.emplace_back(std::nullopt);
      } else {
        c.reflexes.emplace_back(canon(cell));
        ++observed;
      }
    }
    if (observed < 2) {
      throw ParseError(src, lineno, "correspondence needs at least two observed reflexes");
    }
    out.rows.push_back(std::move(c));
  }
  if (!have_header || out.rows.empty()) throw ParseError(src, 0, "no correspondences");
  return out;
}

void write_correspondences(std::ostream& out, const CorrespondenceTable& table) {
  out << "id\tproto";
  for (const auto& l : table.languages) out << '\t' << l;
  out << '\n';
  for (const auto& c : table.rows) {
    out << c.id << '\t' << c.proto;
    for (const auto& r : c.reflexes) out << '\t' << (r ? *r : std::string("-"));
    out << '\n';
  }
}

std::optional<std::size_t> TransitionMatrix::index_of(std::string_view phone) const {
  auto it = std::lower_bound(states.begin(), states.end(), phone);
  if (it == states.end() || *it != phone) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

TransitionMatrix build_matrix(const Correspondence& corr, const std::vector<IntermediatePath>& paths,
                              MatrixMode mode, std::optional<double> penalty) {
  const std::string where = "correspondence " + std::to_string(corr.id);
  if (paths.empty()) throw Error(where + ": no paths");
  const auto reflexes = corr.distinct_reflexes();
  std::set<std::string> state_set;
  for (const auto& p : paths) {
    if (p.phones.empty()) throw Error(where + ": empty path");
    if (p.proto() != corr.proto ||
        !std::binary_search(reflexes.begin(), reflexes.end(), p.reflex())) {
      throw Error(where + ": path " + p.joined() + " does not run from the proto-phoneme to a reflex");
    }
    if (mode == MatrixMode::Weighted && p.edge_costs.size() != p.edges()) {
      throw Error(where + ": weighted matrix needs per-edge costs for " + p.joined());
    }
    state_set.insert(p.phones.begin(), p.phones.end());
  }
  TransitionMatrix m;
  m.mode = mode;
  m.states.assign(state_set.begin(), state_set.end());
  const std::size_t n = m.size();
  std::vector<double> d(n * n, kInf);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
  for (const auto& p : paths) {
    for (std::size_t e = 0; e < p.edges(); ++e) {
      const auto u = *m.index_of(p.phones[e]);
      const auto v = *m.index_of(p.phones[e + 1]);
      const double w = mode == MatrixMode::ExpertUnitEdges ? 1.0 : p.edge_costs[e];
      d[u * n + v] = std::min(d[u * n + v], w);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isinf(d[i * n + k])) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double via = d[i * n + k] + d[k * n + j];
        if (via < d[i * n + j]) d[i * n + j] = via;
      }
    }
  }
  double max_finite = 0.0;
  for (double v : d) {
    if (std::isfinite(v)) max_finite = std::max(max_finite, v);
  }
  m.penalty = penalty.value_or(kPenaltyScale * std::max(1.0, max_finite));
  for (double& v : d) {
    if (std::isinf(v)) v = m.penalty;
  }
  m.cost = std::move(d);
  return m;
}

PathSet load_expert_paths(const std::filesystem::path& path, const PhoneFeatureTable& table) {
  return read_path_dump(path, &table);
}

void write_matrix(std::ostream& out, int corr_id, const TransitionMatrix& matrix) {
  out << "# correspondence " << corr_id << " penalty " << format_cost(matrix.penalty) << '\n';
  out << "from\\to";
  for (const auto& s : matrix.states) out << '\t' << s;
  out << '\n';
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    out << matrix.states[i];
    for (std::size_t j = 0; j < matrix.size(); ++j) out << '\t' << format_cost(matrix.at(i, j));
    out << '\n';
  }
}

}  // namespace sctree
