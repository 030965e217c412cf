#ifndef CHRONOGRAPH_BUNDLE_H_
#define CHRONOGRAPH_BUNDLE_H_

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chronograph/pipeline.h"

namespace chronograph {

inline constexpr std::string_view kBundleFormat = "chronograph-bundle-v1";

struct Manifest {
  std::string format{kBundleFormat};
  std::string edition;
  std::string culture;
  Horizon horizon;
  PageRankParams pagerank;
  std::size_t k = 0;
  Aggregation method = Aggregation::kSum;
  CorpusStats corpus_stats;
  std::size_t person_count = 0;
  std::size_t link_count = 0;
  std::int64_t dropped_links = 0;
  int nonempty_year_count = 0;
  std::vector<Year> nonconverged_years;
  // SHA-256 over the canonical JSON of every other field.
  std::string params_hash;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
  std::string compute_hash() const;
  bool operator==(const Manifest&) const = default;
};

struct SeriesPoint {
  Year year = 0;
  int rank = 0;  // 1-based position within the year's top-k
  double pagerank = 0;
  bool operator==(const SeriesPoint&) const = default;
};

// Relative path of a year file: years/-0099.json, years/00001.json.
std::string year_file_name(Year year);

// Refuses a non-empty target directory. Output bytes depend only on the
// inputs: sorted keys, shortest round-trip floats, no timestamps.
Manifest write_bundle(const RunOutputs& run, const Corpus& corpus,
                      const std::filesystem::path& dir);

// Read side of a bundle. Only the manifest is read on open; everything else
// is loaded when first asked for. Safe for concurrent readers.
class Bundle {
 public:
  // Throws UnsupportedFormatError on a format mismatch and CorruptionError
  // when the manifest hash does not match its contents.
  static std::shared_ptr<const Bundle> open(const std::filesystem::path& dir);

  const Manifest& manifest() const { return manifest_; }
  const std::filesystem::path& dir() const { return dir_; }

  // Reads years/<year>.json. RangeError outside the horizon; CorruptionError
  // when the file is missing or unreadable.
  YearRecord year(Year year) const;

  const AllTimeRanking& alltime() const;
  // Indexed by person id.
  const std::vector<Person>& people() const;
  // Empty when the person never reached a top-k.
  std::vector<SeriesPoint> series(PersonId id) const;
  nlohmann::json report(std::string_view name) const;

  // Number of year files opened so far.
  std::size_t year_reads() const;

 private:
  Bundle() = default;

  std::filesystem::path dir_;
  Manifest manifest_;

  mutable std::once_flag alltime_once_, people_once_, series_once_;
  mutable AllTimeRanking alltime_;
  mutable std::vector<Person> people_;
  mutable std::map<PersonId, std::vector<SeriesPoint>> series_;
  mutable std::atomic<std::size_t> year_reads_{0};
};

}  // namespace chronograph

#endif  // CHRONOGRAPH_BUNDLE_H_
