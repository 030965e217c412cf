#ifndef CHRONOGRAPH_CENTRALITY_H_
#define CHRONOGRAPH_CENTRALITY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chronograph/temporal_graph.h"

namespace chronograph {

struct PageRankParams {
  double damping = 0.85;
  // Stop once the L1 change between iterations drops below this.
  double epsilon = 1e-9;
  int max_iter = 100;

  // Throws InputError unless 0 < damping < 1, epsilon > 0 and max_iter >= 1.
  void validate() const;
  bool operator==(const PageRankParams&) const = default;
};

// Scores aligned with `ids` (ascending person ids).
struct PageRankResult {
  std::vector<PersonId> ids;
  std::vector<double> scores;
  int iterations = 0;
  bool converged = false;

  std::optional<double> score_of(PersonId id) const;
};

// Power iteration from the uniform vector. Dangling mass is spread uniformly
// over all nodes. Summation follows ascending person id so results do not
// depend on the order edges are stored in. Throws InputError on an empty
// slice; hitting max_iter is reported through `converged`.
PageRankResult pagerank(const YearSlice& slice, const PageRankParams& params = {});

// Distinct in-neighbours within the slice, aligned with the sorted node list.
std::vector<int> indegree(const YearSlice& slice);

struct RankEntry {
  PersonId id = 0;
  double pagerank = 0;
  int indegree = 0;
  bool operator==(const RankEntry&) const = default;
};

// Total order used everywhere: pagerank desc, indegree desc, id asc.
bool ranks_before(const RankEntry& a, const RankEntry& b);

struct YearRanking {
  Year year = 0;
  std::size_t k = 0;
  std::vector<RankEntry> entries;
  int iterations = 0;
  bool converged = true;
  bool operator==(const YearRanking&) const = default;
};

// Every node of the slice, ordered by ranks_before. An empty slice yields an
// empty ranking rather than an error.
YearRanking score_year(const YearSlice& slice, const PageRankParams& params = {});

// Top-k of score_year. Throws InputError when k == 0 or the slice is empty.
YearRanking rank_year(const YearSlice& slice, std::size_t k,
                      const PageRankParams& params = {});

enum class Aggregation { kSum, kMean, kMax };

std::string_view aggregation_name(Aggregation a);
std::optional<Aggregation> parse_aggregation(std::string_view s);

struct AllTimeEntry {
  PersonId id = 0;
  double score = 0;
  // Sum over scored years of the within-slice indegree.
  std::int64_t indegree = 0;
  bool operator==(const AllTimeEntry&) const = default;
};

struct AllTimeRanking {
  std::string edition;
  Aggregation method = Aggregation::kSum;
  std::vector<AllTimeEntry> entries;
  bool operator==(const AllTimeRanking&) const = default;
};

// Streaming accumulator over per-year rankings. Feed years in ascending order
// for bit-reproducible sums.
class AllTimeAggregator {
 public:
  void add(const YearRanking& ranking);
  // Folds in a partial result covering later years.
  void merge(const AllTimeAggregator& other);
  AllTimeRanking finish(std::string edition, Aggregation method) const;

 private:
  struct Acc {
    double sum = 0;
    double max = 0;
    std::int64_t indegree = 0;
    int years = 0;
  };
  std::unordered_map<PersonId, Acc> acc_;
};

// Throws InputError unless the rankings cover a contiguous ascending range of
// years. Empty input gives an empty ranking.
AllTimeRanking aggregate_alltime(std::span<const YearRanking> rankings,
                                 Aggregation method, std::string edition = "");

}  // namespace chronograph

#endif  // CHRONOGRAPH_CENTRALITY_H_
