#ifndef CHRONOGRAPH_TEMPORAL_GRAPH_H_
#define CHRONOGRAPH_TEMPORAL_GRAPH_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "chronograph/corpus.h"

namespace chronograph {

// A link whose endpoints are both alive over [start, end].
struct IntervalEdge {
  PersonId src = 0;
  PersonId dst = 0;
  Year start = 0;
  Year end = 0;
  bool operator==(const IntervalEdge&) const = default;
};

using Edge = std::pair<PersonId, PersonId>;

// The network of one year: persons alive in it and the links among them.
// Nodes are sorted ascending; edges are sorted by (src, dst).
struct YearSlice {
  Year year = 0;
  std::vector<PersonId> nodes;
  std::vector<Edge> edges;
  bool operator==(const YearSlice&) const = default;
};

// Static stabbing index over closed integer intervals within a fixed domain.
// Each interval is stored in O(log domain) segment-tree nodes; a query walks
// one root-to-leaf path, so it costs O(log domain + output).
class IntervalIndex {
 public:
  IntervalIndex() = default;
  IntervalIndex(Year lo, Year hi, std::span<const std::pair<Year, Year>> intervals);

  // Indices of intervals containing `y`, in unspecified order.
  void stab(Year y, std::vector<std::uint32_t>& out) const;

 private:
  template <typename Fn>
  void decompose(int node, Year lo, Year hi, Year a, Year b, Fn&& fn) const;

  Year lo_ = 0;
  Year hi_ = -1;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> items_;
};

// Per-year activation and deactivation events in CSR form. Index i holds the
// events at year horizon.start + i; deactivation happens at end + 1.
struct EventList {
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> items;

  std::span<const std::uint32_t> at(int index) const {
    return {items.data() + offsets[index], items.data() + offsets[index + 1]};
  }
};

class TemporalGraph {
 public:
  static TemporalGraph build(const Corpus& corpus);

  const Horizon& horizon() const { return horizon_; }
  std::size_t person_count() const { return lifespans_.size(); }
  const std::vector<std::pair<Year, Year>>& lifespans() const { return lifespans_; }
  const std::vector<IntervalEdge>& edges() const { return edges_; }
  std::int64_t dropped_links() const { return dropped_links_; }

  const EventList& node_activations() const { return node_on_; }
  const EventList& node_deactivations() const { return node_off_; }
  const EventList& edge_activations() const { return edge_on_; }
  const EventList& edge_deactivations() const { return edge_off_; }

  // Throws RangeError when `year` is outside the horizon.
  YearSlice slice(Year year) const;

  // Visits every year in [from, to] in ascending order. The slice handed to
  // the visitor equals slice(year). Exceptions from the visitor abort the
  // sweep and propagate.
  void sweep(Year from, Year to,
             const std::function<void(const YearSlice&)>& visitor) const;

  // Splits [from, to] into contiguous chunks swept on `workers` threads. The
  // visitor is called concurrently for different chunks, sequentially within
  // one chunk. The first exception thrown by any chunk is rethrown.
  void parallel_sweep(Year from, Year to, unsigned workers,
                      const std::function<void(const YearSlice&)>& visitor) const;

  // Horizon years with at least one alive person.
  int nonempty_year_count() const;

 private:
  void check_range(Year from, Year to) const;

  Horizon horizon_;
  std::vector<std::pair<Year, Year>> lifespans_;
  std::vector<IntervalEdge> edges_;
  std::int64_t dropped_links_ = 0;
  IntervalIndex node_index_;
  IntervalIndex edge_index_;
  EventList node_on_, node_off_, edge_on_, edge_off_;
};

}  // namespace chronograph

#endif  // CHRONOGRAPH_TEMPORAL_GRAPH_H_
