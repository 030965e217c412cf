#include "chronograph/bundle.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "chronograph/errors.h"
#include "chronograph/format.h"

namespace chronograph {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr)) {
    throw Error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out.flush()) throw Error("write failed: " + path.string());
}

std::string read_text(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptionError("bundle is missing " + what + " (" + path.string() + ")");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const fs::path& path) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw CorruptionError(path.string() + ": " + e.what());
  }
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// RFC 4180 rows, quoted fields may span lines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    any = true;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

json year_to_json(const YearRecord& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"id", e.id}, {"pagerank", e.pagerank}, {"indegree", e.indegree}});
  }
  json edges = json::array();
  for (const auto& [s, d] : r.edges) edges.push_back({s, d});
  return {{"year", r.year}, {"entries", std::move(entries)}, {"edges", std::move(edges)}};
}

json person_to_json(const Person& p) {
  return {{"id", p.id},
          {"title", p.title},
          {"birth", p.birth},
          {"death", p.death},
          {"occupation", occupation_name(p.occupation)},
          {"culture", p.culture},
          {"key", p.effective_key()}};
}

}  // namespace

json Manifest::to_json() const {
  json stats = json::object();
  for (const auto& [name, field] : kStatsFields) stats[std::string(name)] = corpus_stats.*field;
  json j = {
      {"format", format},
      {"edition", edition},
      {"culture", culture},
      {"horizon", {horizon.start, horizon.end}},
      {"pagerank",
       {{"damping", pagerank.damping}, {"epsilon", pagerank.epsilon}, {"max_iter", pagerank.max_iter}}},
      {"k", k},
      {"aggregation", aggregation_name(method)},
      {"corpus_stats", std::move(stats)},
      {"person_count", person_count},
      {"link_count", link_count},
      {"dropped_links", dropped_links},
      {"nonempty_year_count", nonempty_year_count},
      {"nonconverged_years", nonconverged_years},
  };
  if (!params_hash.empty()) j["params_hash"] = params_hash;
  return j;
}

Manifest Manifest::from_json(const json& j) {
  Manifest m;
  m.format = j.at("format").get<std::string>();
  if (m.format != kBundleFormat) {
    throw UnsupportedFormatError("unsupported bundle format '" + m.format + "', expected '" +
                                 std::string(kBundleFormat) + "'");
  }
  m.edition = j.at("edition").get<std::string>();
  m.culture = j.at("culture").get<std::string>();
  m.horizon = {j.at("horizon").at(0).get<Year>(), j.at("horizon").at(1).get<Year>()};
  const json& pr = j.at("pagerank");
  m.pagerank = {pr.at("damping").get<double>(), pr.at("epsilon").get<double>(),
                pr.at("max_iter").get<int>()};
  m.k = j.at("k").get<std::size_t>();
  auto method = parse_aggregation(j.at("aggregation").get<std::string>());
  if (!method) throw CorruptionError("manifest has an unknown aggregation");
  m.method = *method;
  for (const auto& [name, field] : kStatsFields) {
    m.corpus_stats.*field = j.at("corpus_stats").at(std::string(name)).get<std::int64_t>();
  }
  m.person_count = j.at("person_count").get<std::size_t>();
  m.link_count = j.at("link_count").get<std::size_t>();
  m.dropped_links = j.at("dropped_links").get<std::int64_t>();
  m.nonempty_year_count = j.at("nonempty_year_count").get<int>();
  m.nonconverged_years = j.at("nonconverged_years").get<std::vector<Year>>();
  m.params_hash = j.value("params_hash", std::string());
  return m;
}

std::string Manifest::compute_hash() const {
  json j = to_json();
  j.erase("params_hash");
  return sha256_hex(j.dump());
}

std::string year_file_name(Year year) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05d.json", year);
  return std::string("years/") + buf;
}

Manifest write_bundle(const RunOutputs& run, const Corpus& corpus, const fs::path& dir) {
  if (corpus.persons.empty()) throw EmptyCorpusError();
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw InputError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir, ec)) throw InputError("refusing to write into non-empty directory " + dir.string());
  }
  fs::create_directories(dir / "years", ec);
  if (ec) throw Error("cannot create " + (dir / "years").string() + ": " + ec.message());
  fs::create_directories(dir / "reports", ec);
  if (ec) throw Error("cannot create " + (dir / "reports").string() + ": " + ec.message());

  Manifest m;
  m.edition = run.edition;
  m.culture = run.culture;
  m.horizon = run.config.range;
  m.pagerank = run.config.pagerank;
  m.k = run.config.k;
  m.method = run.config.method;
  m.corpus_stats = run.corpus_stats;
  m.person_count = run.person_count;
  m.link_count = run.link_count;
  m.dropped_links = run.dropped_links;
  m.nonempty_year_count = run.nonempty_year_count;
  m.nonconverged_years = run.nonconverged_years;
  m.params_hash = m.compute_hash();
  write_text(dir / "manifest.json", m.to_json().dump(2) + "\n");

  std::string csv = "rank,id,title,score,indegree\n";
  for (std::size_t i = 0; i < run.alltime.entries.size(); ++i) {
    const AllTimeEntry& e = run.alltime.entries[i];
    csv += std::to_string(i + 1) + "," + std::to_string(e.id) + "," +
           csv_field(corpus.persons.at(e.id).title) + "," + format_double(e.score) + "," +
           std::to_string(e.indegree) + "\n";
  }
  write_text(dir / "alltime.csv", csv);

  std::string people;
  for (const Person& p : corpus.persons) people += person_to_json(p).dump() + "\n";
  write_text(dir / "people.jsonl", people);

  std::map<PersonId, json> series;
  for (const YearRecord& r : run.years) {
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      series[r.entries[i].id].push_back({r.year, static_cast<int>(i + 1), r.entries[i].pagerank});
    }
  }
  std::string series_text;
  for (auto& [id, points] : series) {
    series_text += json{{"id", id}, {"series", std::move(points)}}.dump() + "\n";
  }
  write_text(dir / "series.jsonl", series_text);

  json categories = json::array();
  json ingroup = json::array();
  for (const CategoryReport& r : run.categories) {
    categories.push_back(to_json(r));
    ingroup.push_back({{"n", r.n},
                       {"culture", r.ingroup_culture},
                       {"ingroup_count", r.ingroup_count},
                       {"outgroup_share", r.n > 0 ? json(outgroup_share(r)) : json(nullptr)}});
  }
  write_text(dir / "reports" / "categories.json", categories.dump(2) + "\n");
  write_text(dir / "reports" / "ingroup.json", ingroup.dump(2) + "\n");

  for (const YearRecord& r : run.years) {
    write_text(dir / year_file_name(r.year), year_to_json(r).dump() + "\n");
  }
  return m;
}

std::shared_ptr<const Bundle> Bundle::open(const fs::path& dir) {
  std::shared_ptr<Bundle> b(new Bundle());
  b->dir_ = dir;
  const fs::path path = dir / "manifest.json";
  json j = parse_json(read_text(path, "manifest.json"), path);
  try {
    b->manifest_ = Manifest::from_json(j);
  } catch (const json::exception& e) {
    throw CorruptionError(path.string() + ": " + e.what());
  }
  if (b->manifest_.params_hash != b->manifest_.compute_hash()) {
    throw CorruptionError(path.string() + ": manifest hash mismatch");
  }
  return b;
}

YearRecord Bundle::year(Year year) const {
  if (!manifest_.horizon.contains(year)) {
    throw RangeError("year " + std::to_string(year) + " outside bundle horizon [" +
                     std::to_string(manifest_.horizon.start) + ", " +
                     std::to_string(manifest_.horizon.end) + "]");
  }
  const fs::path path = dir_ / year_file_name(year);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptionError("bundle is missing the file for year " + std::to_string(year));
  ++year_reads_;
  std::ostringstream ss;
  ss << in.rdbuf();
  json j = parse_json(ss.str(), path);
  try {
    YearRecord r;
    r.year = j.at("year").get<Year>();
    if (r.year != year) throw CorruptionError(path.string() + ": holds year " + std::to_string(r.year));
    for (const auto& e : j.at("entries")) {
      r.entries.push_back({e.at("id").get<PersonId>(), e.at("pagerank").get<double>(),
                           e.at("indegree").get<int>()});
    }
    for (const auto& e : j.at("edges")) r.edges.emplace_back(e.at(0).get<PersonId>(), e.at(1).get<PersonId>());
    return r;
  } catch (const json::exception& e) {
    throw CorruptionError(path.string() + ": " + e.what());
  }
}

std::size_t Bundle::year_reads() const { return year_reads_; }

const AllTimeRanking& Bundle::alltime() const {
  std::call_once(alltime_once_, [&] {
    const fs::path path = dir_ / "alltime.csv";
    auto rows = parse_csv(read_text(path, "alltime.csv"));
    if (rows.empty() || rows[0] != std::vector<std::string>{"rank", "id", "title", "score", "indegree"}) {
      throw CorruptionError(path.string() + ": bad header");
    }
    AllTimeRanking r;
    r.edition = manifest_.edition;
    r.method = manifest_.method;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (row.size() != 5) throw CorruptionError(path.string() + ": row " + std::to_string(i) + " malformed");
      try {
        r.entries.push_back({std::stoi(row[1]), std::stod(row[3]), std::stoll(row[4])});
      } catch (const std::exception&) {
        throw CorruptionError(path.string() + ": row " + std::to_string(i) + " malformed");
      }
    }
    alltime_ = std::move(r);
  });
  return alltime_;
}

const std::vector<Person>& Bundle::people() const {
  std::call_once(people_once_, [&] {
    const fs::path path = dir_ / "people.jsonl";
    std::istringstream in(read_text(path, "people.jsonl"));
    std::vector<Person> people;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = parse_json(line, path);
      try {
        Person p;
        p.id = j.at("id").get<PersonId>();
        p.title = j.at("title").get<std::string>();
        p.birth = j.at("birth").get<Year>();
        p.death = j.at("death").get<Year>();
        auto tag = j.at("occupation").get<std::string>();
        auto occupation = parse_occupation(tag);
        if (!occupation) spdlog::warn("{}: unknown occupation '{}' counted as other", path.string(), tag);
        p.occupation = occupation.value_or(Occupation::kOther);
        p.culture = j.at("culture").get<std::string>();
        p.key = j.at("key").get<std::string>();
        if (p.key == identity_key(p.title)) p.key.clear();
        if (p.id != static_cast<PersonId>(people.size())) throw CorruptionError(path.string() + ": ids not dense");
        people.push_back(std::move(p));
      } catch (const json::exception& e) {
        throw CorruptionError(path.string() + ": " + e.what());
      }
    }
    people_ = std::move(people);
  });
  return people_;
}

std::vector<SeriesPoint> Bundle::series(PersonId id) const {
  std::call_once(series_once_, [&] {
    const fs::path path = dir_ / "series.jsonl";
    std::istringstream in(read_text(path, "series.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = parse_json(line, path);
      try {
        auto& points = series_[j.at("id").get<PersonId>()];
        for (const auto& p : j.at("series")) {
          points.push_back({p.at(0).get<Year>(), p.at(1).get<int>(), p.at(2).get<double>()});
        }
      } catch (const json::exception& e) {
        throw CorruptionError(path.string() + ": " + e.what());
      }
    }
  });
  auto it = series_.find(id);
  return it == series_.end() ? std::vector<SeriesPoint>{} : it->second;
}

json Bundle::report(std::string_view name) const {
  if (name != "categories" && name != "ingroup") throw RangeError("unknown report '" + std::string(name) + "'");
  const fs::path path = dir_ / "reports" / (std::string(name) + ".json");
  return parse_json(read_text(path, "report " + std::string(name)), path);
}

}  // namespace chronograph
