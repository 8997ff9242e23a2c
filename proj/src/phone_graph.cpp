#include "sctree/phone_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sctree/error.hpp"
#include "sctree/random.hpp"
#include "sctree/text.hpp"

namespace sctree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTolerance = 1e-9;
// Floor for edges between distinct phones whose feature vectors coincide.
constexpr double kMinEdgeWeight = 1e-9;

bool cost_equal(double a, double b) {
  if (a == b) return true;
  if (std::isinf(a) || std::isinf(b)) return false;
  return std::abs(a - b) <= kTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

bool label_less(double ca, const std::vector<std::size_t>& a, double cb,
                const std::vector<std::size_t>& b) {
  if (!cost_equal(ca, cb)) return ca < cb;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::optional<DigraphPath> dijkstra(std::size_t n, const WeightFn& weight, std::size_t source,
                                    std::size_t target, const std::vector<char>& blocked_node,
                                    const std::set<std::pair<std::size_t, std::size_t>>& blocked_edge) {
  std::vector<double> dist(n, kInf);
  std::vector<std::vector<std::size_t>> route(n);
  std::vector<char> done(n, 0);
  dist[source] = 0.0;
  route[source] = {source};
  while (true) {
    std::optional<std::size_t> best;
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v] || blocked_node[v] || std::isinf(dist[v])) continue;
      if (!best || label_less(dist[v], route[v], dist[*best], route[*best])) best = v;
    }
    if (!best) break;
    const std::size_t u = *best;
    done[u] = 1;
    if (u == target) break;
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u || done[v] || blocked_node[v]) continue;
      if (!blocked_edge.empty() && blocked_edge.count({u, v})) continue;
      const double w = weight(u, v);
      if (!std::isfinite(w)) continue;
      const double cand = dist[u] + w;
      std::vector<std::size_t> cand_route = route[u];
      cand_route.push_back(v);
      if (std::isinf(dist[v]) || label_less(cand, cand_route, dist[v], route[v])) {
        dist[v] = cand;
        route[v] = std::move(cand_route);
      }
    }
  }
  if (!done[target]) return std::nullopt;
  return DigraphPath{std::move(route[target]), dist[target]};
}

double route_cost(const WeightFn& weight, const std::vector<std::size_t>& nodes) {
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) c += weight(nodes[i], nodes[i + 1]);
  return c;
}

}  // namespace

std::string IntermediatePath::joined() const {
  std::string out;
  for (std::size_t i = 0; i < phones.size(); ++i) {
    if (i) out += '>';
    out += phones[i];
  }
  return out;
}

std::vector<DigraphPath> k_shortest_paths(std::size_t node_count, const WeightFn& weight,
                                          std::size_t source, std::size_t target, std::size_t k) {
  if (source >= node_count || target >= node_count) throw Error("path endpoint out of range");
  if (k == 0) return {};
  std::vector<char> no_block(node_count, 0);
  auto first = dijkstra(node_count, weight, source, target, no_block, {});
  if (!first) return {};
  std::vector<DigraphPath> accepted{std::move(*first)};
  std::vector<DigraphPath> candidates;
  auto known = [&](const std::vector<std::size_t>& nodes) {
    auto same = [&](const DigraphPath& p) { return p.nodes == nodes; };
    return std::any_of(accepted.begin(), accepted.end(), same) ||
           std::any_of(candidates.begin(), candidates.end(), same);
  };
  while (accepted.size() < k) {
    const std::vector<std::size_t> prev = accepted.back().nodes;
    for (std::size_t i = 0; i + 1 < prev.size(); ++i) {
      const std::size_t spur = prev[i];
      std::set<std::pair<std::size_t, std::size_t>> blocked_edge;
      for (const auto& p : accepted) {
        if (p.nodes.size() > i + 1 && std::equal(prev.begin(), prev.begin() + static_cast<long>(i) + 1,
                                                 p.nodes.begin())) {
          blocked_edge.insert({p.nodes[i], p.nodes[i + 1]});
        }
      }
      std::vector<char> blocked_node(node_count, 0);
      for (std::size_t j = 0; j < i; ++j) blocked_node[prev[j]] = 1;
      auto spur_path = dijkstra(node_count, weight, spur, target, blocked_node, blocked_edge);
      if (!spur_path) continue;
      std::vector<std::size_t> nodes(prev.begin(), prev.begin() + static_cast<long>(i));
      nodes.insert(nodes.end(), spur_path->nodes.begin(), spur_path->nodes.end());
      if (known(nodes)) continue;
      const double cost = route_cost(weight, nodes);
      candidates.push_back({std::move(nodes), cost});
    }
    if (candidates.empty()) break;
    auto best = std::min_element(candidates.begin(), candidates.end(),
                                 [](const DigraphPath& a, const DigraphPath& b) {
                                   return label_less(a.cost, a.nodes, b.cost, b.nodes);
                                 });
    accepted.push_back(std::move(*best));
    candidates.erase(best);
  }
  return accepted;
}

PhoneGraph PhoneGraph::build(const PhoneFeatureTable& table, const FeatureEditModel* model,
                             const GraphConfig& config,
                             const std::vector<std::string>& extra_phones) {
  if (table.inventory().empty()) throw Error("phone graph needs a nonempty inventory");
  if (model && model->feature_count() != table.feature_count()) {
    throw Error("model feature count does not match the feature table");
  }
  PhoneGraph g;
  g.mode_ = model ? GraphMode::Dwfed : GraphMode::FedAblation;
  g.config_ = config;
  g.phones_ = table.inventory();
  g.phones_.emplace_back(kNullPhone);
  for (const auto& p : extra_phones) {
    if (!is_null_phone(p)) g.phones_.push_back(table.canonical(p));
  }
  std::sort(g.phones_.begin(), g.phones_.end());
  g.phones_.erase(std::unique(g.phones_.begin(), g.phones_.end()), g.phones_.end());
  for (std::size_t i = 0; i < g.phones_.size(); ++i) {
    g.index_.emplace(g.phones_[i], i);
    if (is_null_phone(g.phones_[i])) {
      g.null_id_ = i;
      g.vectors_.emplace_back();
    } else {
      g.vectors_.push_back(table.encode(g.phones_[i]));
    }
  }
  if (model) {
    g.probabilities_.resize(g.phones_.size());
    for (std::size_t i = 0; i < g.phones_.size(); ++i) {
      if (i != g.null_id_) g.probabilities_[i] = predict(*model, g.phones_[i], table);
    }
    // Null-phone base: mean directed cost over a seeded sample of ordered pairs.
    std::vector<std::size_t> real;
    for (std::size_t i = 0; i < g.phones_.size(); ++i) {
      if (i != g.null_id_) real.push_back(i);
    }
    double sum = 0.0;
    std::size_t count = 0;
    const std::size_t all_pairs = real.size() * (real.size() - 1);
    if (all_pairs > 0 && all_pairs <= config.base_sample) {
      for (auto u : real) {
        for (auto v : real) {
          if (u == v) continue;
          sum += g.weight(u, v);
          ++count;
        }
      }
    } else if (all_pairs > 0) {
      Rng rng(config.seed);
      while (count < config.base_sample) {
        const auto u = real[rng.below(real.size())];
        const auto v = real[rng.below(real.size())];
        if (u == v) continue;
        sum += g.weight(u, v);
        ++count;
      }
    }
    g.indel_base_ = count ? sum / static_cast<double>(count) : kIndelCost;
  }
  return g;
}

std::optional<std::size_t> PhoneGraph::index_of(std::string_view phone) const {
  if (auto it = index_.find(phone); it != index_.end()) return it->second;
  if (auto it = index_.find(nfd(phone)); it != index_.end()) return it->second;
  return std::nullopt;
}

double PhoneGraph::weight(std::size_t from, std::size_t to) const {
  if (from == to) return 0.0;
  if (from == null_id_) return config_.insertion_mult * indel_base_;
  if (to == null_id_) return config_.deletion_mult * indel_base_;
  double w;
  if (mode_ == GraphMode::FedAblation) {
    w = static_cast<double>(differing_features(vectors_[from], vectors_[to])) /
        static_cast<double>(vectors_[from].size());
  } else {
    w = dwfed_from_probabilities(vectors_[from], vectors_[to], probabilities_[from]);
  }
  return std::max(w, kMinEdgeWeight);
}

double PhoneGraph::weight(std::string_view from, std::string_view to) const {
  const auto u = index_of(from);
  const auto v = index_of(to);
  if (!u) throw UnknownPhoneError(std::string(from));
  if (!v) throw UnknownPhoneError(std::string(to));
  return weight(*u, *v);
}

std::vector<IntermediatePath> PhoneGraph::shortest_paths(std::string_view proto,
                                                         std::string_view reflex,
                                                         std::size_t k) const {
  if (k == 0) throw Error("path count must be at least 1");
  const auto src = index_of(proto);
  const auto dst = index_of(reflex);
  if (!src) throw UnknownPhoneError(std::string(proto));
  if (!dst) throw UnknownPhoneError(std::string(reflex));
  const WeightFn w = [this](std::size_t u, std::size_t v) { return weight(u, v); };
  const auto found = k_shortest_paths(node_count(), w, *src, *dst, k);
  if (found.empty()) throw Error("internal: no path in a complete phone graph");
  std::vector<IntermediatePath> out;
  for (const auto& p : found) {
    IntermediatePath ip;
    for (auto id : p.nodes) ip.phones.push_back(phones_[id]);
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
      ip.edge_costs.push_back(weight(p.nodes[i], p.nodes[i + 1]));
      ip.total_cost += ip.edge_costs.back();
    }
    out.push_back(std::move(ip));
  }
  return out;
}

void write_path_dump(std::ostream& out, const PathSet& paths) {
  for (const auto& [id, list] : paths) {
    for (const auto& p : list) {
      out << id << '\t' << p.proto() << '\t' << p.reflex() << '\t' << p.joined() << '\t'
          << format_cost(p.total_cost) << '\n';
    }
  }
}

PathSet read_path_dump(const std::filesystem::path& path, const PhoneFeatureTable* table) {
  const auto lines = read_lines(path);
  PathSet out;
  const std::string src = path.string();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trim(lines[i]).empty() || lines[i].front() == '#') continue;
    const auto cells = split(lines[i], '\t');
    if (cells.size() != 5) {
      throw ParseError(src, lineno, "expected corr_id, proto, reflex, path, total_cost");
    }
    int id = 0;
    try {
      id = std::stoi(cells[0]);
    } catch (const std::exception&) {
      throw ParseError(src, lineno, "bad correspondence id '" + cells[0] + "'");
    }
    IntermediatePath p;
    for (auto& phone : split(cells[3], '>')) {
      std::string ph(trim(phone));
      if (ph.empty()) throw ParseError(src, lineno, "empty phone in path");
      if (table && !is_null_phone(ph)) {
        if (!table->contains(ph)) throw ParseError(src, lineno, "unknown phone '" + ph + "'");
        ph = table->canonical(ph);
      }
      p.phones.push_back(std::move(ph));
    }
    auto norm = [&](const std::string& s) {
      std::string t(trim(s));
      return table && !is_null_phone(t) && table->contains(t) ? table->canonical(t) : t;
    };
    if (norm(cells[1]) != p.proto() || norm(cells[2]) != p.reflex()) {
      throw ParseError(src, lineno, "path endpoints disagree with proto/reflex columns");
    }
    try {
      p.total_cost = std::stod(cells[4]);
    } catch (const std::exception&) {
      throw ParseError(src, lineno, "bad total cost '" + cells[4] + "'");
    }
    if (p.edges() == 1) p.edge_costs = {p.total_cost};
    auto& list = out[id];
    if (std::find(list.begin(), list.end(), p) == list.end()) list.push_back(std::move(p));
  }
  if (out.empty()) throw ParseError(src, 0, "no paths");
  return out;
}

PathStats path_stats(const PathSet& paths) {
  std::map<std::pair<std::string, std::string>, std::set<std::vector<std::string>>> unique;
  for (const auto& [id, list] : paths) {
    for (const auto& p : list) unique[{p.proto(), p.reflex()}].insert(p.phones);
  }
  if (unique.empty()) throw Error("path statistics need at least one path");
  std::size_t path_count = 0, edge_count = 0;
  for (const auto& [pair, set] : unique) {
    path_count += set.size();
    for (const auto& phones : set) edge_count += phones.size() - 1;
  }
  return {static_cast<double>(path_count) / static_cast<double>(unique.size()),
          static_cast<double>(edge_count) / static_cast<double>(path_count)};
}

double expert_path_recall(const PathSet& predicted, const PathSet& expert) {
  std::set<int> pred_ids, expert_ids;
  for (const auto& [id, l] : predicted) pred_ids.insert(id);
  for (const auto& [id, l] : expert) expert_ids.insert(id);
  if (pred_ids != expert_ids) {
    throw Error("predicted and expert paths cover different correspondences");
  }
  std::size_t hit = 0, total = 0;
  for (const auto& [id, list] : expert) {
    std::set<std::string> wanted;
    for (const auto& p : list) {
      for (std::size_t i = 1; i + 1 < p.phones.size(); ++i) wanted.insert(p.phones[i]);
    }
    std::set<std::string> have;
    for (const auto& p : predicted.at(id)) have.insert(p.phones.begin(), p.phones.end());
    total += wanted.size();
    for (const auto& ph : wanted) hit += have.count(ph);
  }
  if (total == 0) throw Error("expert paths contain no intermediate phones");
  return static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace sctree
