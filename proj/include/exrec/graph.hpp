#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "exrec/corpus.hpp"
#include "exrec/error.hpp"
#include "exrec/parallel.hpp"

namespace exrec {

/// Counts from one graph build.
struct GraphBuildReport {
  std::size_t answers = 0;           // answers examined
  std::size_t edges_contributed = 0; // answers that produced or reinforced an edge
  std::size_t orphans = 0;           // parent missing
  std::size_t ownerless = 0;         // answer or parent has no owner
  std::size_t self_answers = 0;      // asker answered their own question
};

/// Simple directed asker -> answerer graph. Node ids are user ids; internally
/// nodes are indexed in ascending user id order.
class QaGraph {
 public:
  struct Edge {
    std::size_t to = 0;
    std::int64_t weight = 0;  // distinct questions of the asker answered
  };

  QaGraph() = default;

  /// Graph from explicit (asker, answerer, weight) triples. Self-loops are
  /// dropped and repeated pairs merge by summing weights.
  static QaGraph from_edges(std::vector<UserId> nodes,
                            const std::vector<std::tuple<UserId, UserId, std::int64_t>>& edges) {
    QaGraph g;
    for (const auto& [a, b, w] : edges) {
      nodes.push_back(a);
      nodes.push_back(b);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    g.nodes_ = std::move(nodes);
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> merged;
    for (const auto& [a, b, w] : edges) {
      if (a == b) continue;
      if (w < 1) throw ArgumentError("edge weight must be positive");
      merged[{*g.index_of(a), *g.index_of(b)}] += w;
    }
    g.out_.assign(g.nodes_.size(), {});
    g.in_.assign(g.nodes_.size(), {});
    for (const auto& [e, w] : merged) {
      g.out_[e.first].push_back({e.second, w});
      g.in_[e.second].push_back(e.first);
    }
    g.edge_count_ = merged.size();
    return g;
  }

  std::span<const UserId> nodes() const noexcept { return nodes_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  std::optional<std::size_t> index_of(UserId user) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), user);
    if (it == nodes_.end() || *it != user) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
  }

  bool contains(UserId user) const { return index_of(user).has_value(); }

  /// C(U): the number of distinct users who answered U's questions.
  std::size_t out_degree(UserId user) const {
    auto i = index_of(user);
    return i ? out_[*i].size() : 0;
  }

  /// 0 when there is no edge.
  std::int64_t edge_weight(UserId asker, UserId answerer) const {
    auto a = index_of(asker);
    auto b = index_of(answerer);
    if (!a || !b) return 0;
    for (const auto& e : out_[*a])
      if (e.to == *b) return e.weight;
    return 0;
  }

  // index-based access for the rank computation
  std::span<const Edge> successors(std::size_t i) const { return out_[i]; }
  std::span<const std::size_t> predecessors(std::size_t i) const { return in_[i]; }

  /// One `asker answerer weight` line per edge, ascending by asker then
  /// answerer.
  std::string edge_list() const {
    std::string out;
    for (std::size_t a = 0; a < nodes_.size(); ++a)
      for (const auto& e : out_[a])
        out += std::to_string(nodes_[a]) + ' ' + std::to_string(nodes_[e.to]) +
               ' ' + std::to_string(e.weight) + '\n';
    return out;
  }

 private:
  std::vector<UserId> nodes_;
  std::vector<std::vector<Edge>> out_;     // sorted by target index
  std::vector<std::vector<std::size_t>> in_;  // sorted
  std::size_t edge_count_ = 0;
};

struct GraphBuild {
  QaGraph graph;
  GraphBuildReport report;
};

/// Every post owner becomes a node; every answer whose parent resolves and
/// whose owner differs from the asker adds (or reinforces) asker -> answerer.
inline GraphBuild build_graph(const CorpusStore& store) {
  GraphBuild out;
  std::set<std::tuple<UserId, UserId, PostId>> answered;  // asker, answerer, question
  for (const auto& p : store.posts()) {
    if (!p.is_answer()) continue;
    ++out.report.answers;
    const Post* q = store.parent_of(p);
    if (!q) {
      ++out.report.orphans;
      continue;
    }
    if (!p.owner || !q->owner) {
      ++out.report.ownerless;
      continue;
    }
    if (*p.owner == *q->owner) {
      ++out.report.self_answers;
      continue;
    }
    ++out.report.edges_contributed;
    answered.emplace(*q->owner, *p.owner, q->id);
  }
  std::map<std::pair<UserId, UserId>, std::int64_t> weights;
  for (const auto& [a, b, q] : answered) ++weights[{a, b}];
  std::vector<std::tuple<UserId, UserId, std::int64_t>> edges;
  edges.reserve(weights.size());
  for (const auto& [e, w] : weights) edges.emplace_back(e.first, e.second, w);
  out.graph = QaGraph::from_edges(store.owners(), edges);
  return out;
}

inline nlohmann::ordered_json report_json(const GraphBuildReport& r) {
  nlohmann::ordered_json j;
  j["answers"] = r.answers;
  j["edges_contributed"] = r.edges_contributed;
  j["orphans"] = r.orphans;
  j["ownerless"] = r.ownerless;
  j["self_answers"] = r.self_answers;
  return j;
}

struct ErOptions {
  double d = 0.85;
  double tol = 1e-8;
  std::size_t max_iter = 100;
  // Distribute ER(U) in proportion to edge weights instead of 1/C(U).
  bool weighted = false;
  unsigned threads = 1;
};

struct ErScores {
  std::map<UserId, double> er;
  std::size_t iterations = 0;
  double residual = 0;  // max-norm change of the last iteration
  bool converged = false;
  double d = 0.85;
  std::string store_hash;  // store the graph was built from, if known

  double floor() const { return 1.0 - d; }
};

/// Synchronous fixed-point iteration of
///   ER(A) = (1 - d) + d * sum over predecessors U of ER(U) / C(U)
/// starting from ER = 1 everywhere. Stops once the max-norm update drops
/// below tol, or after max_iter sweeps with converged = false.
inline ErScores expertise_rank(const QaGraph& g, const ErOptions& opt = {}) {
  if (!(opt.d > 0.0 && opt.d < 1.0))
    throw ArgumentError("damping factor must lie in (0, 1)");
  if (!(opt.tol > 0.0)) throw ArgumentError("tolerance must be positive");
  const std::size_t n = g.node_count();

  // share[v][k]: fraction of ER(pred k) that flows into v, aligned with the
  // predecessor list so the sweep reads only in-edges.
  std::vector<std::vector<double>> share(n);
  std::vector<double> total_weight(n, 0.0);
  for (std::size_t u = 0; u < n; ++u)
    for (const auto& e : g.successors(u)) total_weight[u] += static_cast<double>(e.weight);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u : g.predecessors(v)) {
      if (!opt.weighted) {
        share[v].push_back(1.0 / static_cast<double>(g.successors(u).size()));
      } else {
        double w = 0;
        for (const auto& e : g.successors(u))
          if (e.to == v) w = static_cast<double>(e.weight);
        share[v].push_back(w / total_weight[u]);
      }
    }
  }

  const double base = 1.0 - opt.d;
  std::vector<double> cur(n, 1.0), next(n, 0.0);
  ErScores out;
  out.d = opt.d;
  std::vector<double> delta(n, 0.0);
  while (out.iterations < opt.max_iter) {
    parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t v = b; v < e; ++v) {
        double s = 0;
        const auto preds = g.predecessors(v);
        for (std::size_t k = 0; k < preds.size(); ++k) s += cur[preds[k]] * share[v][k];
        next[v] = base + opt.d * s;
        delta[v] = std::abs(next[v] - cur[v]);
      }
    });
    out.residual = n == 0 ? 0.0 : *std::max_element(delta.begin(), delta.end());
    cur.swap(next);
    ++out.iterations;
    if (out.residual < opt.tol) {
      out.converged = true;
      break;
    }
  }
  if (n == 0) out.converged = true;
  for (std::size_t i = 0; i < n; ++i) out.er.emplace(g.nodes()[i], cur[i]);
  return out;
}

/// Largest |ER(A) - rhs(A)| over nodes, i.e. how far the scores are from
/// satisfying the fixed-point relation.
inline double fixed_point_defect(const QaGraph& g, const ErScores& s,
                                 bool weighted = false) {
  const std::size_t n = g.node_count();
  std::vector<double> er(n);
  for (std::size_t i = 0; i < n; ++i) er[i] = s.er.at(g.nodes()[i]);
  std::vector<double> rhs(n, 1.0 - s.d);
  for (std::size_t u = 0; u < n; ++u) {
    double total = 0;
    for (const auto& e : g.successors(u)) total += static_cast<double>(e.weight);
    for (const auto& e : g.successors(u)) {
      const double frac = weighted ? static_cast<double>(e.weight) / total
                                   : 1.0 / static_cast<double>(g.successors(u).size());
      rhs[e.to] += s.d * er[u] * frac;
    }
  }
  double worst = 0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(er[i] - rhs[i]));
  return worst;
}

/// Projection of global scores onto a candidate list; users outside the
/// graph get the isolated-node value 1 - d.
inline std::map<UserId, double> candidate_er(const ErScores& scores,
                                             const std::vector<UserId>& candidates) {
  std::map<UserId, double> out;
  for (UserId u : candidates) {
    auto it = scores.er.find(u);
    out[u] = it != scores.er.end() ? it->second : scores.floor();
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// `user_id score` lines in ascending user order, preceded by a `# ` line
/// carrying a JSON header with the run parameters.
inline std::string scores_text(const ErScores& s, nlohmann::ordered_json header) {
  header["d"] = s.d;
  header["iterations"] = s.iterations;
  header["residual"] = s.residual;
  header["converged"] = s.converged;
  header["store_hash"] = s.store_hash;
  std::string out = "# " + header.dump() + "\n";
  for (const auto& [u, v] : s.er) out += std::to_string(u) + ' ' + format_double(v) + '\n';
  return out;
}

struct LoadedScores {
  ErScores scores;
  nlohmann::ordered_json header;
};

inline LoadedScores parse_scores(std::string_view text) {
  LoadedScores out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    const std::size_t offset = pos;
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.starts_with("# ")) {
      if (line_no != 1) continue;
      try {
        out.header = nlohmann::ordered_json::parse(line.substr(2));
        out.scores.d = out.header.at("d").get<double>();
        out.scores.iterations = out.header.at("iterations").get<std::size_t>();
        out.scores.residual = out.header.at("residual").get<double>();
        out.scores.converged = out.header.at("converged").get<bool>();
        out.scores.store_hash = out.header.value("store_hash", std::string());
      } catch (const nlohmann::json::exception& e) {
        throw ParseError("scores header: " + std::string(e.what()), offset);
      }
      continue;
    }
    const auto sp = line.find(' ');
    UserId u = 0;
    double v = 0;
    if (sp == std::string_view::npos ||
        std::from_chars(line.data(), line.data() + sp, u).ec != std::errc{} ||
        std::from_chars(line.data() + sp + 1, line.data() + line.size(), v).ec !=
            std::errc{})
      throw ParseError("malformed score line " + std::to_string(line_no), offset);
    if (!out.scores.er.emplace(u, v).second)
      throw IntegrityError("duplicate score for user " + std::to_string(u));
  }
  return out;
}

}  // namespace exrec
