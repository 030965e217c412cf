#include "chronograph/temporal_graph.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <string>
#include <thread>

#include "chronograph/errors.h"

namespace chronograph {
namespace {

// Counting sort of (bucket, item) pairs into CSR form; items keep ascending
// order within a bucket.
EventList make_events(int buckets, std::span<const std::pair<int, std::uint32_t>> entries) {
  EventList events;
  events.offsets.assign(static_cast<std::size_t>(buckets) + 1, 0);
  for (auto [b, item] : entries) ++events.offsets[b + 1];
  for (int b = 0; b < buckets; ++b) events.offsets[b + 1] += events.offsets[b];
  events.items.resize(entries.size());
  std::vector<std::uint32_t> cursor(events.offsets.begin(), events.offsets.end() - 1);
  for (auto [b, item] : entries) events.items[cursor[b]++] = item;
  return events;
}

// Active set with O(1) insert and erase.
class ActiveSet {
 public:
  explicit ActiveSet(std::size_t universe) : pos_(universe, -1) {}

  void insert(std::uint32_t item) {
    if (pos_[item] >= 0) return;
    pos_[item] = static_cast<std::int32_t>(items_.size());
    items_.push_back(item);
  }

  void erase(std::uint32_t item) {
    std::int32_t p = pos_[item];
    if (p < 0) return;
    std::uint32_t last = items_.back();
    items_[p] = last;
    pos_[last] = p;
    items_.pop_back();
    pos_[item] = -1;
  }

  const std::vector<std::uint32_t>& items() const { return items_; }

 private:
  std::vector<std::int32_t> pos_;
  std::vector<std::uint32_t> items_;
};

struct SweepAborted {};

}  // namespace

IntervalIndex::IntervalIndex(Year lo, Year hi,
                             std::span<const std::pair<Year, Year>> intervals)
    : lo_(lo), hi_(hi) {
  const std::size_t tree = 4 * static_cast<std::size_t>(hi - lo + 1) + 1;
  offsets_.assign(tree + 1, 0);
  for (const auto& [a, b] : intervals) {
    decompose(1, lo_, hi_, a, b, [&](int node) { ++offsets_[node + 1]; });
  }
  for (std::size_t i = 0; i < tree; ++i) offsets_[i + 1] += offsets_[i];
  items_.resize(offsets_[tree]);
  std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& [a, b] = intervals[i];
    decompose(1, lo_, hi_, a, b,
              [&](int node) { items_[cursor[node]++] = static_cast<std::uint32_t>(i); });
  }
}

template <typename Fn>
void IntervalIndex::decompose(int node, Year lo, Year hi, Year a, Year b, Fn&& fn) const {
  if (b < lo || hi < a) return;
  if (a <= lo && hi <= b) {
    fn(node);
    return;
  }
  Year mid = lo + (hi - lo) / 2;
  decompose(2 * node, lo, mid, a, b, fn);
  decompose(2 * node + 1, mid + 1, hi, a, b, fn);
}

void IntervalIndex::stab(Year y, std::vector<std::uint32_t>& out) const {
  if (y < lo_ || y > hi_) return;
  int node = 1;
  Year lo = lo_, hi = hi_;
  while (true) {
    out.insert(out.end(), items_.begin() + offsets_[node], items_.begin() + offsets_[node + 1]);
    if (lo == hi) return;
    Year mid = lo + (hi - lo) / 2;
    if (y <= mid) {
      hi = mid;
      node = 2 * node;
    } else {
      lo = mid + 1;
      node = 2 * node + 1;
    }
  }
}

TemporalGraph TemporalGraph::build(const Corpus& corpus) {
  TemporalGraph g;
  g.horizon_ = corpus.horizon;
  const Horizon h = corpus.horizon;
  g.lifespans_.reserve(corpus.persons.size());
  for (const Person& p : corpus.persons) {
    g.lifespans_.emplace_back(std::max(p.birth, h.start), std::min(p.death, h.end));
  }
  for (auto [s, d] : corpus.links) {
    Year start = std::max(g.lifespans_[s].first, g.lifespans_[d].first);
    Year end = std::min(g.lifespans_[s].second, g.lifespans_[d].second);
    if (start > end) {
      ++g.dropped_links_;
      continue;
    }
    g.edges_.push_back({s, d, start, end});
  }

  std::vector<std::pair<Year, Year>> edge_spans;
  edge_spans.reserve(g.edges_.size());
  for (const auto& e : g.edges_) edge_spans.emplace_back(e.start, e.end);
  g.node_index_ = IntervalIndex(h.start, h.end, g.lifespans_);
  g.edge_index_ = IntervalIndex(h.start, h.end, edge_spans);

  auto events = [&](std::span<const std::pair<Year, Year>> spans, EventList& on, EventList& off) {
    std::vector<std::pair<int, std::uint32_t>> starts, ends;
    starts.reserve(spans.size());
    ends.reserve(spans.size());
    for (std::size_t i = 0; i < spans.size(); ++i) {
      auto item = static_cast<std::uint32_t>(i);
      starts.emplace_back(spans[i].first - h.start, item);
      if (spans[i].second < h.end) ends.emplace_back(spans[i].second + 1 - h.start, item);
    }
    on = make_events(h.size(), starts);
    off = make_events(h.size(), ends);
  };
  events(g.lifespans_, g.node_on_, g.node_off_);
  events(edge_spans, g.edge_on_, g.edge_off_);
  return g;
}

void TemporalGraph::check_range(Year from, Year to) const {
  if (from > to) {
    throw RangeError("year range [" + std::to_string(from) + ", " + std::to_string(to) +
                     "] is empty");
  }
  if (!horizon_.contains(from) || !horizon_.contains(to)) {
    throw RangeError("year range [" + std::to_string(from) + ", " + std::to_string(to) +
                     "] outside horizon [" + std::to_string(horizon_.start) + ", " +
                     std::to_string(horizon_.end) + "]");
  }
}

YearSlice TemporalGraph::slice(Year year) const {
  if (!horizon_.contains(year)) {
    throw RangeError("year " + std::to_string(year) + " outside horizon");
  }
  YearSlice s;
  s.year = year;
  std::vector<std::uint32_t> hits;
  node_index_.stab(year, hits);
  s.nodes.assign(hits.begin(), hits.end());
  std::sort(s.nodes.begin(), s.nodes.end());
  hits.clear();
  edge_index_.stab(year, hits);
  std::sort(hits.begin(), hits.end());
  s.edges.reserve(hits.size());
  for (auto i : hits) s.edges.emplace_back(edges_[i].src, edges_[i].dst);
  return s;
}

void TemporalGraph::sweep(Year from, Year to,
                          const std::function<void(const YearSlice&)>& visitor) const {
  check_range(from, to);
  ActiveSet nodes(lifespans_.size());
  ActiveSet edges(edges_.size());
  std::vector<std::uint32_t> seed;
  node_index_.stab(from, seed);
  for (auto i : seed) nodes.insert(i);
  seed.clear();
  edge_index_.stab(from, seed);
  for (auto i : seed) edges.insert(i);

  YearSlice s;
  std::vector<std::uint32_t> order;
  for (Year y = from; y <= to; ++y) {
    if (y > from) {
      const int i = y - horizon_.start;
      for (auto e : edge_off_.at(i)) edges.erase(e);
      for (auto n : node_off_.at(i)) nodes.erase(n);
      for (auto n : node_on_.at(i)) nodes.insert(n);
      for (auto e : edge_on_.at(i)) edges.insert(e);
    }
    s.year = y;
    s.nodes.assign(nodes.items().begin(), nodes.items().end());
    std::sort(s.nodes.begin(), s.nodes.end());
    order.assign(edges.items().begin(), edges.items().end());
    std::sort(order.begin(), order.end());
    s.edges.clear();
    for (auto e : order) s.edges.emplace_back(edges_[e].src, edges_[e].dst);
    visitor(s);
  }
}

void TemporalGraph::parallel_sweep(Year from, Year to, unsigned workers,
                                   const std::function<void(const YearSlice&)>& visitor) const {
  check_range(from, to);
  const long span = static_cast<long>(to) - from + 1;
  const long chunks = std::min<long>(std::max(1u, workers), span);
  if (chunks <= 1) {
    sweep(from, to, visitor);
    return;
  }
  std::atomic<bool> abort{false};
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  for (long c = 0; c < chunks; ++c) {
    Year a = static_cast<Year>(from + span * c / chunks);
    Year b = static_cast<Year>(from + span * (c + 1) / chunks - 1);
    threads.emplace_back([&, a, b, c] {
      try {
        sweep(a, b, [&](const YearSlice& s) {
          if (abort.load(std::memory_order_relaxed)) throw SweepAborted{};
          visitor(s);
        });
      } catch (const SweepAborted&) {
      } catch (...) {
        errors[c] = std::current_exception();
        abort = true;
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int TemporalGraph::nonempty_year_count() const {
  int count = 0;
  long alive = 0;
  for (int i = 0; i < horizon_.size(); ++i) {
    alive += static_cast<long>(node_on_.at(i).size()) - static_cast<long>(node_off_.at(i).size());
    if (alive > 0) ++count;
  }
  return count;
}

}  // namespace chronograph
