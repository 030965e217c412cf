#ifndef CHRONOGRAPH_REPORTS_H_
#define CHRONOGRAPH_REPORTS_H_

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chronograph/centrality.h"
#include "chronograph/corpus.h"

namespace chronograph {

// Culture tag an edition counts as its ingroup ("en" -> "anglo"). Unknown
// editions map to themselves.
std::string default_culture(std::string_view edition);

struct CategoryReport {
  std::string edition;
  std::string ingroup_culture;
  std::size_t requested_n = 0;
  // Entries actually counted: min(requested_n, ranking size).
  std::size_t n = 0;
  bool truncated = false;
  std::array<int, 4> counts{};  // indexed by Occupation
  int ingroup_count = 0;

  int count(Occupation o) const { return counts[static_cast<int>(o)]; }
  bool operator==(const CategoryReport&) const = default;
};

// Occupation and culture tallies over the top-n of an all-time ranking.
// `people` is indexed by person id.
CategoryReport category_distribution(const AllTimeRanking& ranking,
                                     std::span<const Person> people, std::size_t n,
                                     std::string_view ingroup_culture);

// (n - ingroup) / n. Throws InputError when n == 0.
double outgroup_share(const CategoryReport& report);

// Overrides for cross-edition identity keys, by edition then title.
struct IdentityMap {
  std::map<std::string, std::map<std::string, std::string>> keys;

  std::string key_for(std::string_view edition, const Person& person) const;
  static IdentityMap load(const std::filesystem::path& path);
};

struct EditionView {
  std::string edition;
  const AllTimeRanking* ranking = nullptr;
  std::span<const Person> people;
  std::string ingroup_culture;
};

struct PairComparison {
  std::string a;
  std::string b;
  int overlap = 0;
  // Spearman correlation over the shared persons; absent below two.
  std::optional<double> spearman;
};

struct ComparisonReport {
  std::vector<std::string> editions;
  std::size_t n = 0;
  // Keys present in the top-n of every edition, sorted.
  std::vector<std::string> shared;
  std::vector<double> outgroup_shares;
  std::vector<PairComparison> pairs;

  int overlap() const { return static_cast<int>(shared.size()); }
};

// Throws InputError for fewer than two editions.
ComparisonReport compare_editions(std::span<const EditionView> editions,
                                  const IdentityMap& identity, std::size_t n);

// Spearman rank correlation between two orderings of the same items.
std::optional<double> spearman(std::span<const std::string> a, std::span<const std::string> b);

nlohmann::json to_json(const CategoryReport& report);
nlohmann::json to_json(const ComparisonReport& report);

// Aligned-column text tables for terminal output.
std::string format_table(const std::vector<std::vector<std::string>>& rows);
std::string format_categories(const CategoryReport& report);
std::string format_ingroup(const CategoryReport& report);
std::string format_comparison(const ComparisonReport& report);

}  // namespace chronograph

#endif  // CHRONOGRAPH_REPORTS_H_
