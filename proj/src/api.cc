#include "chronograph/api.h"

#include <algorithm>
#include <charconv>
#include <optional>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "chronograph/errors.h"

namespace chronograph {
using nlohmann::json;

namespace {

struct HttpError {
  int status;
  std::string message;
};

ApiResponse ok(const json& body) { return {200, body.dump()}; }

ApiResponse error(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

std::optional<long> parse_int(std::string_view s) {
  long v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Positive integer query parameter, or `fallback` when absent.
std::size_t top_param(const std::multimap<std::string, std::string>& q, std::size_t fallback) {
  auto [lo, hi] = q.equal_range("top");
  if (lo == hi) return fallback;
  auto v = parse_int(std::prev(hi)->second);
  if (!v || *v < 1) throw HttpError{400, "top must be a positive integer"};
  return static_cast<std::size_t>(*v);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    auto p = s.find(sep);
    parts.push_back(s.substr(0, p));
    if (p == std::string_view::npos) return parts;
    s.remove_prefix(p + 1);
  }
}

const std::string& title_of(const std::vector<Person>& people, PersonId id) {
  static const std::string unknown;
  if (id < 0 || static_cast<std::size_t>(id) >= people.size()) return unknown;
  return people[id].title;
}

}  // namespace

void ServiceConfig::validate() const {
  if (bundles.empty()) throw InputError("at least one bundle is required");
  if (port < 0 || port > 65535) throw InputError("port " + std::to_string(port) + " out of range");
  if (cache_years < 1) throw InputError("cache size must be at least 1");
}

std::shared_ptr<const YearRecord> YearCache::get(const std::string& edition, const Bundle& bundle, Year year) {
  Key key{edition, year};
  {
    std::lock_guard lock(mu_);
    if (auto it = index_.find(key); it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return it->second->second;
    }
  }
  // Read outside the lock; two racing misses both read, one insert wins.
  auto record = std::make_shared<const YearRecord>(bundle.year(year));
  std::lock_guard lock(mu_);
  if (auto it = index_.find(key); it != index_.end()) return it->second->second;
  order_.emplace_front(key, record);
  index_[key] = order_.begin();
  while (order_.size() > capacity_) {
    index_.erase(order_.back().first);
    order_.pop_back();
  }
  return record;
}

std::size_t YearCache::size() const {
  std::lock_guard lock(mu_);
  return order_.size();
}

ApiService::ApiService(ServiceConfig config) : config_(std::move(config)), cache_(config_.cache_years) {
  config_.validate();
  for (const auto& [ed, dir] : config_.bundles) {
    auto bundle = Bundle::open(dir);
    if (bundle->manifest().edition != ed) {
      spdlog::warn("bundle {} holds edition '{}', served as '{}'", dir.string(),
                   bundle->manifest().edition, ed);
    }
    editions_[ed] = Edition{std::move(bundle)};
  }
}

ApiService::~ApiService() = default;

const ApiService::Edition* ApiService::find(const std::string& ed) const {
  auto it = editions_.find(ed);
  if (it == editions_.end()) throw HttpError{404, "unknown edition '" + ed + "'"};
  return &it->second;
}

ApiResponse ApiService::handle(std::string_view path, const std::multimap<std::string, std::string>& query) const {
  try {
    auto parts = split(path, '/');
    if (parts.empty() || !parts[0].empty()) throw HttpError{404, "no such route"};
    parts.erase(parts.begin());
    if (!parts.empty() && parts.back().empty()) parts.pop_back();

    if (parts.size() == 1 && parts[0] == "editions") return editions();
    if (parts.size() == 1 && parts[0] == "compare") return compare(query);
    if (parts.size() >= 3 && parts[0] == "editions") {
      std::string ed(parts[1]);
      if (parts.size() == 5 && parts[2] == "years" && parts[4] == "network") return network(ed, parts[3], query);
      if (parts.size() == 4 && parts[2] == "rankings" && parts[3] == "alltime") return alltime(ed, query);
      if (parts.size() == 4 && parts[2] == "people") return person(ed, parts[3]);
      if (parts.size() == 4 && parts[2] == "reports") return report(ed, parts[3], query);
    }
    throw HttpError{404, "no such route"};
  } catch (const HttpError& e) {
    return error(e.status, e.message);
  } catch (const RangeError& e) {
    return error(404, e.what());
  } catch (const InputError& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", path, e.what());
    return error(500, "internal error");
  }
}

ApiResponse ApiService::editions() const {
  json list = json::array();
  for (const auto& [ed, e] : editions_) {
    const Manifest& m = e.bundle->manifest();
    list.push_back({{"edition", ed},
                    {"culture", m.culture},
                    {"horizon", {m.horizon.start, m.horizon.end}},
                    {"k", m.k},
                    {"aggregation", aggregation_name(m.method)},
                    {"nonempty_year_count", m.nonempty_year_count}});
  }
  return ok({{"editions", std::move(list)}});
}

ApiResponse ApiService::network(const std::string& ed, std::string_view year_text,
                                const std::multimap<std::string, std::string>& q) const {
  const Edition* e = find(ed);
  auto year = parse_int(year_text);
  if (!year) throw HttpError{400, "year must be an integer"};
  const Horizon& h = e->bundle->manifest().horizon;
  if (*year < h.start || *year > h.end) {
    throw HttpError{404, "year " + std::string(year_text) + " outside the horizon"};
  }
  const std::size_t top = top_param(q, e->bundle->manifest().k);
  auto record = cache_.get(ed, *e->bundle, static_cast<Year>(*year));
  const auto& people = e->bundle->people();

  const std::size_t n = std::min(top, record->entries.size());
  std::vector<PersonId> members;
  json entries = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const RankEntry& r = record->entries[i];
    members.push_back(r.id);
    entries.push_back({{"id", r.id},
                       {"title", title_of(people, r.id)},
                       {"pagerank", r.pagerank},
                       {"indegree", r.indegree}});
  }
  std::sort(members.begin(), members.end());
  json edges = json::array();
  for (const auto& [s, d] : record->edges) {
    if (std::binary_search(members.begin(), members.end(), s) &&
        std::binary_search(members.begin(), members.end(), d)) {
      edges.push_back({s, d});
    }
  }
  return ok({{"edition", ed}, {"year", record->year}, {"entries", std::move(entries)}, {"edges", std::move(edges)}});
}

ApiResponse ApiService::alltime(const std::string& ed, const std::multimap<std::string, std::string>& q) const {
  const Edition* e = find(ed);
  const AllTimeRanking& ranking = e->bundle->alltime();
  const auto& people = e->bundle->people();
  const std::size_t n = std::min(top_param(q, 50), ranking.entries.size());
  json entries = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const AllTimeEntry& a = ranking.entries[i];
    entries.push_back({{"rank", i + 1},
                       {"id", a.id},
                       {"title", title_of(people, a.id)},
                       {"score", a.score},
                       {"indegree", a.indegree}});
  }
  return ok({{"edition", ed}, {"aggregation", aggregation_name(ranking.method)}, {"entries", std::move(entries)}});
}

ApiResponse ApiService::person(const std::string& ed, std::string_view id_text) const {
  const Edition* e = find(ed);
  auto id = parse_int(id_text);
  if (!id) throw HttpError{400, "person id must be an integer"};
  const auto& people = e->bundle->people();
  if (*id < 0 || static_cast<std::size_t>(*id) >= people.size()) {
    throw HttpError{404, "unknown person " + std::string(id_text)};
  }
  const Person& p = people[*id];
  json series = json::array();
  for (const SeriesPoint& s : e->bundle->series(p.id)) {
    series.push_back({{"year", s.year}, {"rank", s.rank}, {"pagerank", s.pagerank}});
  }
  return ok({{"id", p.id},
             {"title", p.title},
             {"birth", p.birth},
             {"death", p.death},
             {"occupation", occupation_name(p.occupation)},
             {"culture", p.culture},
             {"key", p.effective_key()},
             {"series", std::move(series)}});
}

ApiResponse ApiService::report(const std::string& ed, std::string_view kind,
                               const std::multimap<std::string, std::string>& q) const {
  const Edition* e = find(ed);
  if (kind != "categories" && kind != "ingroup") throw HttpError{404, "unknown report '" + std::string(kind) + "'"};
  const std::size_t n = top_param(q, 50);
  CategoryReport r = category_distribution(e->bundle->alltime(), e->bundle->people(), n,
                                           e->bundle->manifest().culture);
  if (kind == "categories") return ok(to_json(r));
  return ok({{"edition", r.edition},
             {"n", r.n},
             {"culture", r.ingroup_culture},
             {"ingroup_count", r.ingroup_count},
             {"outgroup_share", r.n > 0 ? json(outgroup_share(r)) : json(nullptr)}});
}

ApiResponse ApiService::compare(const std::multimap<std::string, std::string>& q) const {
  auto it = q.find("editions");
  if (it == q.end()) throw HttpError{400, "editions parameter is required"};
  std::vector<EditionView> views;
  for (auto name : split(it->second, ',')) {
    std::string ed(name);
    const Edition* e = find(ed);
    views.push_back({ed, &e->bundle->alltime(), e->bundle->people(), e->bundle->manifest().culture});
  }
  if (views.size() < 2) throw HttpError{400, "compare needs at least two editions"};
  return ok(to_json(compare_editions(views, IdentityMap{}, top_param(q, 50))));
}

void ApiService::install_routes() {
  if (server_) return;
  server_ = std::make_unique<httplib::Server>();
  server_->Get(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
    ApiResponse r = handle(req.path, query);
    res.status = r.status;
    res.set_content(r.body, "application/json");
    const std::string origin = req.get_header_value("Origin");
    for (const auto& allowed : config_.cors_origins) {
      if (allowed == "*" || (!origin.empty() && allowed == origin)) {
        res.set_header("Access-Control-Allow-Origin", allowed == "*" ? "*" : origin);
        break;
      }
    }
  });
}

bool ApiService::serve() {
  install_routes();
  spdlog::info("serving {} edition(s) on {}:{}", editions_.size(), config_.host, config_.port);
  return server_->listen(config_.host, config_.port);
}

int ApiService::bind_any_port() {
  install_routes();
  return server_->bind_to_any_port(config_.host);
}

bool ApiService::serve_bound() {
  install_routes();
  return server_->listen_after_bind();
}

void ApiService::stop() {
  if (server_) server_->stop();
}

}  // namespace chronograph
