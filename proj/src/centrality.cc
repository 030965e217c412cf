#include "chronograph/centrality.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "chronograph/errors.h"

namespace chronograph {
namespace {

// Slice nodes in ascending order plus a lookup from person id to position.
struct LocalIndex {
  std::vector<PersonId> ids;

  explicit LocalIndex(const YearSlice& slice) : ids(slice.nodes) {
    if (!std::is_sorted(ids.begin(), ids.end())) std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }

  std::uint32_t at(PersonId id) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) {
      throw InputError("slice edge endpoint " + std::to_string(id) + " is not a slice node");
    }
    return static_cast<std::uint32_t>(it - ids.begin());
  }
};

// Incoming adjacency with each source list sorted ascending.
struct InAdjacency {
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> sources;
  std::vector<std::uint32_t> out_degree;
};

InAdjacency build_in_adjacency(const LocalIndex& index, const YearSlice& slice) {
  const std::size_t n = index.ids.size();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> local;
  local.reserve(slice.edges.size());
  for (auto [s, d] : slice.edges) local.emplace_back(index.at(d), index.at(s));
  std::sort(local.begin(), local.end());

  InAdjacency adj;
  adj.offsets.assign(n + 1, 0);
  adj.out_degree.assign(n, 0);
  adj.sources.reserve(local.size());
  for (auto [d, s] : local) {
    ++adj.offsets[d + 1];
    ++adj.out_degree[s];
    adj.sources.push_back(s);
  }
  for (std::size_t i = 0; i < n; ++i) adj.offsets[i + 1] += adj.offsets[i];
  return adj;
}

}  // namespace

void PageRankParams::validate() const {
  if (!(damping > 0 && damping < 1)) {
    throw InputError("damping must lie in (0, 1), got " + std::to_string(damping));
  }
  if (!(epsilon > 0)) throw InputError("epsilon must be positive");
  if (max_iter < 1) throw InputError("max_iter must be at least 1");
}

std::optional<double> PageRankResult::score_of(PersonId id) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return std::nullopt;
  return scores[it - ids.begin()];
}

PageRankResult pagerank(const YearSlice& slice, const PageRankParams& params) {
  params.validate();
  LocalIndex index(slice);
  const std::size_t n = index.ids.size();
  if (n == 0) throw InputError("pagerank of an empty slice (year " + std::to_string(slice.year) + ")");
  const InAdjacency adj = build_in_adjacency(index, slice);

  const double d = params.damping;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> x(n, inv_n), next(n), contrib(n);

  PageRankResult result;
  for (int iter = 1; iter <= params.max_iter; ++iter) {
    double dangling = 0;
    for (std::size_t u = 0; u < n; ++u) {
      if (adj.out_degree[u] == 0) {
        dangling += x[u];
        contrib[u] = 0;
      } else {
        contrib[u] = x[u] / adj.out_degree[u];
      }
    }
    const double base = (1.0 - d) * inv_n + d * dangling * inv_n;
    double change = 0;
    for (std::size_t v = 0; v < n; ++v) {
      double acc = 0;
      for (std::uint32_t i = adj.offsets[v]; i < adj.offsets[v + 1]; ++i) {
        acc += contrib[adj.sources[i]];
      }
      next[v] = base + d * acc;
      change += std::abs(next[v] - x[v]);
    }
    x.swap(next);
    result.iterations = iter;
    if (change < params.epsilon) {
      result.converged = true;
      break;
    }
  }
  result.ids = std::move(index.ids);
  result.scores = std::move(x);
  return result;
}

std::vector<int> indegree(const YearSlice& slice) {
  LocalIndex index(slice);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> local;
  local.reserve(slice.edges.size());
  for (auto [s, d] : slice.edges) {
    if (s != d) local.emplace_back(index.at(d), index.at(s));
  }
  std::sort(local.begin(), local.end());
  local.erase(std::unique(local.begin(), local.end()), local.end());
  std::vector<int> counts(index.ids.size(), 0);
  for (auto [d, s] : local) ++counts[d];
  return counts;
}

bool ranks_before(const RankEntry& a, const RankEntry& b) {
  if (a.pagerank != b.pagerank) return a.pagerank > b.pagerank;
  if (a.indegree != b.indegree) return a.indegree > b.indegree;
  return a.id < b.id;
}

YearRanking score_year(const YearSlice& slice, const PageRankParams& params) {
  YearRanking ranking;
  ranking.year = slice.year;
  if (slice.nodes.empty()) {
    params.validate();
    return ranking;
  }
  PageRankResult pr = pagerank(slice, params);
  std::vector<int> in = indegree(slice);
  ranking.entries.reserve(pr.ids.size());
  for (std::size_t i = 0; i < pr.ids.size(); ++i) {
    ranking.entries.push_back({pr.ids[i], pr.scores[i], in[i]});
  }
  std::sort(ranking.entries.begin(), ranking.entries.end(), ranks_before);
  ranking.k = ranking.entries.size();
  ranking.iterations = pr.iterations;
  ranking.converged = pr.converged;
  return ranking;
}

YearRanking rank_year(const YearSlice& slice, std::size_t k, const PageRankParams& params) {
  if (k == 0) throw InputError("k must be at least 1");
  if (slice.nodes.empty()) {
    throw InputError("pagerank of an empty slice (year " + std::to_string(slice.year) + ")");
  }
  YearRanking ranking = score_year(slice, params);
  if (ranking.entries.size() > k) ranking.entries.resize(k);
  ranking.k = k;
  return ranking;
}

std::string_view aggregation_name(Aggregation a) {
  switch (a) {
    case Aggregation::kSum: return "sum";
    case Aggregation::kMean: return "mean";
    case Aggregation::kMax: return "max";
  }
  return "sum";
}

std::optional<Aggregation> parse_aggregation(std::string_view s) {
  for (Aggregation a : {Aggregation::kSum, Aggregation::kMean, Aggregation::kMax}) {
    if (aggregation_name(a) == s) return a;
  }
  return std::nullopt;
}

void AllTimeAggregator::add(const YearRanking& ranking) {
  for (const RankEntry& e : ranking.entries) {
    Acc& a = acc_[e.id];
    a.sum += e.pagerank;
    a.max = std::max(a.max, e.pagerank);
    a.indegree += e.indegree;
    ++a.years;
  }
}

void AllTimeAggregator::merge(const AllTimeAggregator& other) {
  for (const auto& [id, o] : other.acc_) {
    Acc& a = acc_[id];
    a.sum += o.sum;
    a.max = std::max(a.max, o.max);
    a.indegree += o.indegree;
    a.years += o.years;
  }
}

AllTimeRanking AllTimeAggregator::finish(std::string edition, Aggregation method) const {
  AllTimeRanking ranking;
  ranking.edition = std::move(edition);
  ranking.method = method;
  ranking.entries.reserve(acc_.size());
  for (const auto& [id, a] : acc_) {
    double score = 0;
    switch (method) {
      case Aggregation::kSum: score = a.sum; break;
      case Aggregation::kMean: score = a.sum / a.years; break;
      case Aggregation::kMax: score = a.max; break;
    }
    ranking.entries.push_back({id, score, a.indegree});
  }
  std::sort(ranking.entries.begin(), ranking.entries.end(),
            [](const AllTimeEntry& a, const AllTimeEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.indegree != b.indegree) return a.indegree > b.indegree;
              return a.id < b.id;
            });
  return ranking;
}

AllTimeRanking aggregate_alltime(std::span<const YearRanking> rankings, Aggregation method,
                                 std::string edition) {
  AllTimeAggregator agg;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    if (i > 0 && rankings[i].year != rankings[i - 1].year + 1) {
      throw InputError("per-year rankings are not contiguous at year " +
                       std::to_string(rankings[i].year));
    }
    agg.add(rankings[i]);
  }
  return agg.finish(std::move(edition), method);
}

}  // namespace chronograph
