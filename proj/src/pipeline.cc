#include "chronograph/pipeline.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "chronograph/errors.h"

namespace chronograph {
namespace {

YearRecord make_record(const YearSlice& slice, YearRanking&& top) {
  YearRecord record;
  record.year = slice.year;
  record.entries = std::move(top.entries);
  std::vector<PersonId> members;
  members.reserve(record.entries.size());
  for (const auto& e : record.entries) members.push_back(e.id);
  std::sort(members.begin(), members.end());
  auto in_top = [&](PersonId id) { return std::binary_search(members.begin(), members.end(), id); };
  for (const Edge& e : slice.edges) {
    if (in_top(e.first) && in_top(e.second)) record.edges.push_back(e);
  }
  return record;
}

}  // namespace

void RunConfig::validate() const {
  if (range.start > range.end) {
    throw InputError("--from " + std::to_string(range.start) + " is after --to " +
                     std::to_string(range.end));
  }
  pagerank.validate();
  if (k < 1) throw InputError("--top must be at least 1");
  if (workers < 1) throw InputError("--workers must be at least 1");
  if (chunk_years < 1) throw InputError("chunk size must be at least 1");
}

RunOutputs run_pipeline(const Corpus& corpus, const RunConfig& config, const ProgressFn& progress) {
  config.validate();
  validate(corpus);
  if (corpus.persons.empty()) throw EmptyCorpusError();
  if (config.range.start < corpus.horizon.start || config.range.end > corpus.horizon.end) {
    throw InputError("year range [" + std::to_string(config.range.start) + ", " +
                     std::to_string(config.range.end) + "] is outside the corpus horizon [" +
                     std::to_string(corpus.horizon.start) + ", " +
                     std::to_string(corpus.horizon.end) + "]");
  }

  RunOutputs out;
  out.config = config;
  out.edition = corpus.edition;
  out.culture = config.culture.empty() ? default_culture(corpus.edition) : config.culture;
  out.corpus_stats = corpus.stats;
  out.person_count = corpus.persons.size();
  out.link_count = corpus.links.size();

  const TemporalGraph graph = TemporalGraph::build(corpus);
  out.dropped_links = graph.dropped_links();
  out.nonempty_year_count = graph.nonempty_year_count();

  const Horizon range = config.range;
  const int total = range.size();
  const int chunks = (total + config.chunk_years - 1) / config.chunk_years;
  out.years.resize(total);
  std::vector<AllTimeAggregator> partial(chunks);
  std::vector<char> converged(total, 1);

  std::atomic<int> next_chunk{0};
  std::atomic<int> done{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&] {
    while (!failed) {
      const int c = next_chunk++;
      if (c >= chunks) return;
      const Year a = range.start + c * config.chunk_years;
      const Year b = std::min(range.end, a + config.chunk_years - 1);
      try {
        graph.sweep(a, b, [&](const YearSlice& slice) {
          const int i = slice.year - range.start;
          YearRanking full = score_year(slice, config.pagerank);
          converged[i] = full.converged;
          partial[c].add(full);
          if (full.entries.size() > config.k) full.entries.resize(config.k);
          out.years[i] = make_record(slice, std::move(full));
          const int n = ++done;
          if (progress) progress(n, total);
        });
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };

  const unsigned workers = std::min<unsigned>(config.workers, static_cast<unsigned>(chunks));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  // Chunks merge in year order, so the sums are identical for any worker count.
  AllTimeAggregator total_agg;
  for (const auto& p : partial) total_agg.merge(p);
  out.alltime = total_agg.finish(corpus.edition, config.method);

  for (int i = 0; i < total; ++i) {
    if (!converged[i]) out.nonconverged_years.push_back(range.start + i);
  }
  if (!out.nonconverged_years.empty()) {
    spdlog::warn("pagerank hit max_iter={} without converging in {} year(s), first {}",
                 config.pagerank.max_iter, out.nonconverged_years.size(),
                 out.nonconverged_years.front());
  }
  for (std::size_t n : kReportSizes) {
    out.categories.push_back(category_distribution(out.alltime, corpus.persons, n, out.culture));
  }
  return out;
}

}  // namespace chronograph
