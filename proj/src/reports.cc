#include "chronograph/reports.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "chronograph/errors.h"
#include "chronograph/format.h"

namespace chronograph {
namespace {

// Top-n identity keys in rank order, first occurrence of a key wins.
std::vector<std::string> top_keys(const EditionView& view, const IdentityMap& identity,
                                  std::size_t n) {
  std::vector<std::string> keys;
  std::set<std::string> seen;
  for (const AllTimeEntry& e : view.ranking->entries) {
    if (keys.size() >= n) break;
    if (e.id < 0 || static_cast<std::size_t>(e.id) >= view.people.size()) {
      throw InputError(view.edition + ": ranked id " + std::to_string(e.id) + " has no metadata");
    }
    std::string key = identity.key_for(view.edition, view.people[e.id]);
    if (seen.insert(key).second) keys.push_back(std::move(key));
  }
  return keys;
}

}  // namespace

std::string default_culture(std::string_view edition) {
  static const std::map<std::string, std::string, std::less<>> cultures = {
      {"en", "anglo"}, {"zh", "sinic"}, {"ja", "japonic"}, {"de", "germanic"}};
  auto it = cultures.find(edition);
  return it == cultures.end() ? std::string(edition) : it->second;
}

CategoryReport category_distribution(const AllTimeRanking& ranking,
                                     std::span<const Person> people, std::size_t n,
                                     std::string_view ingroup_culture) {
  CategoryReport report;
  report.edition = ranking.edition;
  report.ingroup_culture = ingroup_culture;
  report.requested_n = n;
  report.n = std::min(n, ranking.entries.size());
  report.truncated = report.n < n;
  if (report.truncated) {
    spdlog::warn("{}: ranking has {} entries, fewer than the requested top {}", ranking.edition,
                 ranking.entries.size(), n);
  }
  for (std::size_t i = 0; i < report.n; ++i) {
    PersonId id = ranking.entries[i].id;
    if (id < 0 || static_cast<std::size_t>(id) >= people.size()) {
      throw InputError("ranked id " + std::to_string(id) + " has no metadata");
    }
    const Person& p = people[id];
    ++report.counts[static_cast<int>(p.occupation)];
    if (p.culture == ingroup_culture) ++report.ingroup_count;
  }
  return report;
}

double outgroup_share(const CategoryReport& report) {
  if (report.n == 0) throw InputError("outgroup share is undefined for n = 0");
  return static_cast<double>(report.n - report.ingroup_count) / static_cast<double>(report.n);
}

std::string IdentityMap::key_for(std::string_view edition, const Person& person) const {
  if (auto e = keys.find(std::string(edition)); e != keys.end()) {
    if (auto t = e->second.find(person.title); t != e->second.end()) return t->second;
  }
  return person.effective_key();
}

IdentityMap IdentityMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  IdentityMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      map.keys[j.at("edition").get<std::string>()][normalize_title(j.at("title").get<std::string>())] =
          j.at("key").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return map;
}

std::optional<double> spearman(std::span<const std::string> a, std::span<const std::string> b) {
  std::unordered_map<std::string_view, std::size_t> rank_b;
  for (std::size_t i = 0; i < b.size(); ++i) rank_b.emplace(b[i], i);
  // Rank both lists among shared items only, in each list's own order.
  std::vector<std::size_t> b_pos;
  for (const auto& key : a) {
    if (auto it = rank_b.find(key); it != rank_b.end()) b_pos.push_back(it->second);
  }
  const std::size_t m = b_pos.size();
  if (m < 2) return std::nullopt;
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return b_pos[x] < b_pos[y]; });
  std::vector<double> rb(m);
  for (std::size_t r = 0; r < m; ++r) rb[order[r]] = static_cast<double>(r);
  double d2 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double d = static_cast<double>(i) - rb[i];
    d2 += d * d;
  }
  const double md = static_cast<double>(m);
  return 1.0 - 6.0 * d2 / (md * (md * md - 1.0));
}

ComparisonReport compare_editions(std::span<const EditionView> editions,
                                  const IdentityMap& identity, std::size_t n) {
  if (editions.size() < 2) throw InputError("comparison needs at least two editions");
  ComparisonReport report;
  report.n = n;
  std::vector<std::vector<std::string>> lists;
  for (const EditionView& view : editions) {
    if (!view.ranking) throw InputError(view.edition + ": missing ranking");
    report.editions.push_back(view.edition);
    lists.push_back(top_keys(view, identity, n));
    CategoryReport cat = category_distribution(*view.ranking, view.people, n, view.ingroup_culture);
    report.outgroup_shares.push_back(cat.n == 0 ? 0.0 : outgroup_share(cat));
  }

  std::set<std::string> shared(lists[0].begin(), lists[0].end());
  for (std::size_t i = 1; i < lists.size(); ++i) {
    std::set<std::string> here(lists[i].begin(), lists[i].end());
    std::set<std::string> both;
    std::set_intersection(shared.begin(), shared.end(), here.begin(), here.end(),
                          std::inserter(both, both.begin()));
    shared.swap(both);
  }
  report.shared.assign(shared.begin(), shared.end());

  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (std::size_t j = i + 1; j < lists.size(); ++j) {
      std::set<std::string> a(lists[i].begin(), lists[i].end());
      int overlap = 0;
      for (const auto& k : lists[j]) overlap += a.count(k) ? 1 : 0;
      report.pairs.push_back({report.editions[i], report.editions[j], overlap,
                              spearman(lists[i], lists[j])});
    }
  }
  return report;
}

nlohmann::json to_json(const CategoryReport& r) {
  nlohmann::json j;
  j["edition"] = r.edition;
  j["ingroup_culture"] = r.ingroup_culture;
  j["requested_n"] = r.requested_n;
  j["n"] = r.n;
  j["truncated"] = r.truncated;
  nlohmann::json counts;
  for (Occupation o : kAllOccupations) counts[std::string(occupation_name(o))] = r.count(o);
  j["counts"] = counts;
  j["ingroup_count"] = r.ingroup_count;
  if (r.n > 0) {
    j["outgroup_share"] = outgroup_share(r);
  } else {
    j["outgroup_share"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const ComparisonReport& r) {
  nlohmann::json j;
  j["editions"] = r.editions;
  j["n"] = r.n;
  j["overlap"] = r.overlap();
  j["shared"] = r.shared;
  j["outgroup_shares"] = r.outgroup_shares;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    nlohmann::json pj;
    pj["editions"] = {p.a, p.b};
    pj["overlap"] = p.overlap;
    if (p.spearman) {
      pj["spearman"] = *p.spearman;
    } else {
      pj["spearman"] = nullptr;
    }
    pairs.push_back(std::move(pj));
  }
  j["pairs"] = std::move(pairs);
  return j;
}

std::string format_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += row[c];
      if (c + 1 < row.size()) line.append(width[c] - row[c].size(), ' ');
    }
    out += line;
    out += '\n';
  }
  return out;
}

std::string format_categories(const CategoryReport& r) {
  std::vector<std::vector<std::string>> rows = {
      {"edition", "n", "politician", "religious", "artist_scientist", "other", "ingroup"}};
  rows.push_back({r.edition, std::to_string(r.n),
                  std::to_string(r.count(Occupation::kPolitician)),
                  std::to_string(r.count(Occupation::kReligious)),
                  std::to_string(r.count(Occupation::kArtistScientist)),
                  std::to_string(r.count(Occupation::kOther)), std::to_string(r.ingroup_count)});
  return format_table(rows);
}

std::string format_ingroup(const CategoryReport& r) {
  std::vector<std::vector<std::string>> rows = {
      {"edition", "n", "culture", "ingroup", "outgroup", "outgroup_share"}};
  rows.push_back({r.edition, std::to_string(r.n), r.ingroup_culture, std::to_string(r.ingroup_count),
                  std::to_string(r.n - r.ingroup_count),
                  r.n > 0 ? format_double(outgroup_share(r)) : "-"});
  return format_table(rows);
}

std::string format_comparison(const ComparisonReport& r) {
  std::vector<std::vector<std::string>> rows = {{"edition", "outgroup_share"}};
  for (std::size_t i = 0; i < r.editions.size(); ++i) {
    rows.push_back({r.editions[i], format_double(r.outgroup_shares[i])});
  }
  std::string out = format_table(rows);
  out += '\n';
  rows = {{"pair", "overlap", "spearman"}};
  for (const auto& p : r.pairs) {
    rows.push_back({p.a + "/" + p.b, std::to_string(p.overlap),
                    p.spearman ? format_double(*p.spearman) : "-"});
  }
  out += format_table(rows);
  out += "\nshared in all top-" + std::to_string(r.n) + ": " + std::to_string(r.overlap()) + "\n";
  return out;
}

}  // namespace chronograph
