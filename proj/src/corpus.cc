#include "chronograph/corpus.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "chronograph/errors.h"

namespace chronograph {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

enum class DateKind { kBirth, kDeath };

// Parses "N births", "N BC births", "N deaths" or "N BC deaths".
std::optional<std::pair<DateKind, Year>> parse_date_category(std::string_view cat) {
  cat = trim(cat);
  std::size_t digits = 0;
  while (digits < cat.size() && std::isdigit(static_cast<unsigned char>(cat[digits]))) ++digits;
  if (digits == 0 || digits > 9) return std::nullopt;
  int n = 0;
  std::from_chars(cat.data(), cat.data() + digits, n);
  if (n <= 0) return std::nullopt;
  std::string_view rest = cat.substr(digits);
  bool bc = false;
  if (rest.starts_with(" BC ")) {
    bc = true;
    rest.remove_prefix(3);
  }
  DateKind kind;
  if (rest == " births") {
    kind = DateKind::kBirth;
  } else if (rest == " deaths") {
    kind = DateKind::kDeath;
  } else {
    return std::nullopt;
  }
  return std::pair{kind, bc ? 1 - n : n};
}

using ordered_json = nlohmann::ordered_json;

ordered_json stats_to_json(const CorpusStats& s) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, field] : kStatsFields) j[std::string(name)] = s.*field;
  return j;
}

CorpusStats stats_from_json(const nlohmann::json& j) {
  CorpusStats s;
  for (const auto& [name, field] : kStatsFields) {
    if (auto it = j.find(name); it != j.end()) s.*field = it->get<std::int64_t>();
  }
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view occupation_name(Occupation o) {
  switch (o) {
    case Occupation::kPolitician: return "politician";
    case Occupation::kReligious: return "religious";
    case Occupation::kArtistScientist: return "artist_scientist";
    case Occupation::kOther: return "other";
  }
  return "other";
}

std::optional<Occupation> parse_occupation(std::string_view s) {
  for (Occupation o : kAllOccupations) {
    if (occupation_name(o) == s) return o;
  }
  return std::nullopt;
}

std::string normalize_title(std::string_view title) {
  std::string out;
  out.reserve(title.size());
  for (char c : trim(title)) {
    if (c == '_' || c == '\t' || c == '\n' || c == '\r') c = ' ';
    if (c == ' ' && !out.empty() && out.back() == ' ') continue;
    out += c;
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  if (!out.empty() && std::islower(static_cast<unsigned char>(out.front()))) {
    out.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(out.front())));
  }
  return out;
}

std::string identity_key(std::string_view title) {
  std::string key = normalize_title(title);
  std::replace(key.begin(), key.end(), ' ', '_');
  return key;
}

std::optional<LifeDates> extract_dates(std::span<const std::string> categories) {
  std::optional<Year> birth;
  std::optional<Year> death;
  int births = 0;
  int deaths = 0;
  for (const std::string& cat : categories) {
    auto parsed = parse_date_category(cat);
    if (!parsed) continue;
    auto [kind, year] = *parsed;
    if (kind == DateKind::kBirth) {
      ++births;
      birth = birth ? std::min(*birth, year) : year;
    } else {
      ++deaths;
      death = death ? std::max(*death, year) : year;
    }
  }
  if (!birth) return std::nullopt;
  return LifeDates{*birth, death, births > 1 || deaths > 1};
}

Annotations load_annotations(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  Annotations out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::string title = normalize_title(j.at("title").get<std::string>());
      if (title.empty()) throw InputError("empty title");
      Annotation a;
      if (j.contains("occupation")) {
        auto tag = j.at("occupation").get<std::string>();
        if (auto o = parse_occupation(tag)) {
          a.occupation = *o;
        } else {
          spdlog::warn("{}:{}: unknown occupation '{}' counted as other",
                       path.string(), line_no, tag);
          ++out.unknown_occupations;
        }
      }
      if (j.contains("culture")) a.culture = j.at("culture").get<std::string>();
      if (j.contains("key")) a.key = j.at("key").get<std::string>();
      out.by_title[title] = std::move(a);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void annotate(Corpus& corpus, const Annotations& annotations) {
  for (Person& p : corpus.persons) {
    auto it = annotations.by_title.find(p.title);
    if (it == annotations.by_title.end()) continue;
    p.occupation = it->second.occupation;
    p.culture = it->second.culture;
    p.key = it->second.key;
  }
  corpus.stats.unknown_occupations += annotations.unknown_occupations;
}

Corpus resolve(std::span<const RawPage> pages, const ResolveOptions& options) {
  const Horizon horizon = options.horizon;
  Corpus corpus;
  corpus.edition = options.edition;
  corpus.horizon = horizon;
  CorpusStats& stats = corpus.stats;
  stats.pages_seen = static_cast<std::int64_t>(pages.size());

  std::unordered_map<std::string_view, std::size_t> by_title;
  std::set<std::string> collisions;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (pages[i].title.empty()) throw InputError("page with empty title");
    if (!by_title.emplace(pages[i].title, i).second) collisions.insert(pages[i].title);
  }
  if (!collisions.empty()) {
    std::string msg = "duplicate titles:";
    for (const auto& t : collisions) msg += " '" + t + "'";
    throw InputError(msg);
  }

  std::unordered_map<std::string_view, std::string_view> redirects;
  std::vector<std::size_t> person_pages;
  std::vector<std::pair<Year, Year>> lifespans(pages.size());
  for (std::size_t i = 0; i < pages.size(); ++i) {
    const RawPage& page = pages[i];
    if (page.redirect_target) {
      ++stats.redirects;
      redirects.emplace(page.title, *page.redirect_target);
      continue;
    }
    auto dates = extract_dates(page.categories);
    if (!dates) {
      ++stats.undated;
      continue;
    }
    if (dates->ambiguous) {
      ++stats.multiple_dates;
      spdlog::debug("'{}' has several birth or death categories", page.title);
    }
    Year birth = dates->birth;
    Year death = dates->death.value_or(horizon.end);
    if (birth > death) {
      ++stats.invalid_dates;
      spdlog::debug("'{}' dies before birth ({} > {})", page.title, birth, death);
      continue;
    }
    if (birth > horizon.end || death < horizon.start) {
      ++stats.out_of_horizon;
      continue;
    }
    lifespans[i] = {std::max(birth, horizon.start), std::min(death, horizon.end)};
    person_pages.push_back(i);
  }
  if (person_pages.empty()) throw EmptyCorpusError();

  std::sort(person_pages.begin(), person_pages.end(),
            [&](std::size_t a, std::size_t b) { return pages[a].title < pages[b].title; });
  std::unordered_map<std::string_view, PersonId> person_of;
  corpus.persons.reserve(person_pages.size());
  for (std::size_t i : person_pages) {
    Person p;
    p.id = static_cast<PersonId>(corpus.persons.size());
    p.title = pages[i].title;
    std::tie(p.birth, p.death) = lifespans[i];
    person_of.emplace(pages[i].title, p.id);
    corpus.persons.push_back(std::move(p));
  }

  // Follows redirects; nullopt for cycles and chains longer than the cap.
  auto follow = [&](std::string_view title) -> std::optional<std::string_view> {
    for (int depth = 0; depth <= kMaxRedirectDepth; ++depth) {
      auto it = redirects.find(title);
      if (it == redirects.end()) return title;
      title = it->second;
    }
    return std::nullopt;
  };

  std::set<std::pair<PersonId, PersonId>> links;
  for (std::size_t k = 0; k < person_pages.size(); ++k) {
    const PersonId src = static_cast<PersonId>(k);
    for (const std::string& target : pages[person_pages[k]].wikilinks) {
      auto resolved = follow(target);
      if (!resolved) {
        ++stats.redirect_cycles;
        ++stats.dangling_links;
        continue;
      }
      auto it = person_of.find(*resolved);
      if (it == person_of.end()) {
        ++stats.dangling_links;
        continue;
      }
      if (it->second == src) {
        ++stats.self_links;
        continue;
      }
      if (!links.emplace(src, it->second).second) ++stats.duplicate_links;
    }
  }
  corpus.links.assign(links.begin(), links.end());
  if (options.annotations) annotate(corpus, *options.annotations);
  return corpus;
}

void validate(const Corpus& corpus) {
  if (corpus.horizon.start > corpus.horizon.end) {
    throw InputError("horizon start after end");
  }
  std::unordered_set<std::string_view> titles;
  for (std::size_t i = 0; i < corpus.persons.size(); ++i) {
    const Person& p = corpus.persons[i];
    if (p.id != static_cast<PersonId>(i)) {
      throw InputError("person '" + p.title + "' has non-dense id " + std::to_string(p.id));
    }
    if (p.title.empty()) throw InputError("person " + std::to_string(p.id) + " has empty title");
    if (!titles.insert(p.title).second) throw InputError("duplicate title '" + p.title + "'");
    if (p.birth > p.death) throw InputError("person '" + p.title + "' has birth after death");
    if (!corpus.horizon.contains(p.birth) || !corpus.horizon.contains(p.death)) {
      throw InputError("person '" + p.title + "' lives outside the horizon");
    }
  }
  const auto n = static_cast<PersonId>(corpus.persons.size());
  for (std::size_t i = 0; i < corpus.links.size(); ++i) {
    auto [s, d] = corpus.links[i];
    if (s < 0 || s >= n || d < 0 || d >= n) {
      throw InputError("link (" + std::to_string(s) + "," + std::to_string(d) + ") has an unknown endpoint");
    }
    if (s == d) throw InputError("self-link on person " + std::to_string(s));
    if (i > 0 && !(corpus.links[i - 1] < corpus.links[i])) {
      throw InputError("links not sorted or duplicated at (" + std::to_string(s) + "," + std::to_string(d) + ")");
    }
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  ordered_json header;
  header["edition"] = corpus.edition;
  header["horizon"] = {corpus.horizon.start, corpus.horizon.end};
  header["format"] = kCorpusFormat;
  header["stats"] = stats_to_json(corpus.stats);
  out += header.dump();
  out += '\n';

  std::size_t li = 0;
  for (const Person& p : corpus.persons) {
    ordered_json j;
    j["id"] = p.id;
    j["title"] = p.title;
    j["birth"] = p.birth;
    j["death"] = p.death;
    auto links = ordered_json::array();
    while (li < corpus.links.size() && corpus.links[li].first < p.id) ++li;
    while (li < corpus.links.size() && corpus.links[li].first == p.id) {
      links.push_back(corpus.links[li].second);
      ++li;
    }
    j["links"] = std::move(links);
    j["occupation"] = occupation_name(p.occupation);
    j["culture"] = p.culture;
    if (!p.key.empty()) j["key"] = p.key;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << serialize_corpus(corpus);
  if (!out.flush()) throw InputError("write failed: " + path.string());
}

Corpus parse_corpus(std::string_view text) {
  Corpus corpus;
  bool first = true;
  int line_no = 0;
  std::size_t pos = 0;
  std::set<std::pair<PersonId, PersonId>> links;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
    try {
      auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw InputError(where() + "expected a JSON object");
      if (first && j.contains("format")) {
        first = false;
        if (j.at("format").get<std::string>() != kCorpusFormat) {
          throw InputError(where() + "unsupported corpus format '" +
                           j.at("format").get<std::string>() + "'");
        }
        corpus.edition = j.at("edition").get<std::string>();
        auto h = j.at("horizon");
        if (!h.is_array() || h.size() != 2) throw InputError(where() + "horizon must be [start, end]");
        corpus.horizon = {h[0].get<Year>(), h[1].get<Year>()};
        if (corpus.horizon.start > corpus.horizon.end) throw InputError(where() + "horizon start after end");
        if (j.contains("stats")) corpus.stats = stats_from_json(j.at("stats"));
        continue;
      }
      first = false;
      Person p;
      p.id = j.at("id").get<PersonId>();
      p.title = j.at("title").get<std::string>();
      p.birth = j.at("birth").get<Year>();
      p.death = j.at("death").get<Year>();
      auto tag = j.at("occupation").get<std::string>();
      auto occupation = parse_occupation(tag);
      if (!occupation) throw InputError(where() + "unknown occupation '" + tag + "'");
      p.occupation = *occupation;
      p.culture = j.at("culture").get<std::string>();
      if (j.contains("key")) p.key = j.at("key").get<std::string>();
      if (p.title.empty()) throw InputError(where() + "empty title");
      if (p.id != static_cast<PersonId>(corpus.persons.size())) {
        throw InputError(where() + "expected id " + std::to_string(corpus.persons.size()) +
                         ", found " + std::to_string(p.id));
      }
      if (p.birth > p.death) {
        throw InputError(where() + "person '" + p.title + "' has birth after death");
      }
      if (!corpus.horizon.contains(p.birth) || !corpus.horizon.contains(p.death)) {
        throw InputError(where() + "person '" + p.title + "' lives outside the horizon");
      }
      for (const auto& dst : j.at("links")) {
        PersonId d = dst.get<PersonId>();
        if (d == p.id) throw InputError(where() + "self-link on '" + p.title + "'");
        if (d < 0) throw InputError(where() + "negative link target");
        if (!links.emplace(p.id, d).second) {
          throw InputError(where() + "duplicate link to " + std::to_string(d));
        }
      }
      corpus.persons.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(where() + e.what());
    }
  }
  if (corpus.persons.empty()) throw EmptyCorpusError();
  const auto n = static_cast<PersonId>(corpus.persons.size());
  for (auto [s, d] : links) {
    if (d >= n) {
      throw InputError("person '" + corpus.persons[s].title + "' links to unknown id " +
                       std::to_string(d));
    }
  }
  corpus.links.assign(links.begin(), links.end());
  std::unordered_set<std::string_view> titles;
  for (const Person& p : corpus.persons) {
    if (!titles.insert(p.title).second) throw InputError("duplicate title '" + p.title + "'");
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  try {
    return parse_corpus(read_file(path));
  } catch (const EmptyCorpusError&) {
    throw;
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace chronograph
