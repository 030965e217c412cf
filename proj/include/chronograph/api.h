#ifndef CHRONOGRAPH_API_H_
#define CHRONOGRAPH_API_H_

#include <cstddef>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chronograph/bundle.h"

namespace httplib {
class Server;
}

namespace chronograph {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  // Bundle directory per edition.
  std::map<std::string, std::filesystem::path> bundles;
  // Origins echoed in Access-Control-Allow-Origin; "*" allows any.
  std::vector<std::string> cors_origins;
  std::size_t cache_years = 128;

  void validate() const;
};

// LRU over decoded year files, keyed by edition and year.
class YearCache {
 public:
  explicit YearCache(std::size_t capacity) : capacity_(capacity) {}

  std::shared_ptr<const YearRecord> get(const std::string& edition, const Bundle& bundle, Year year);
  std::size_t size() const;

 private:
  using Key = std::pair<std::string, Year>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<std::string>()(k.first) * 31 + std::hash<Year>()(k.second);
    }
  };

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<std::pair<Key, std::shared_ptr<const YearRecord>>> order_;
  std::unordered_map<Key, decltype(order_)::iterator, KeyHash> index_;
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

// Read-only JSON API over one or more bundles:
//
//   GET /editions
//   GET /editions/{ed}/years/{y}/network?top=K
//   GET /editions/{ed}/rankings/alltime?top=N
//   GET /editions/{ed}/people/{id}
//   GET /editions/{ed}/reports/{categories|ingroup}?top=N
//   GET /compare?editions=a,b&top=N
//
// Errors are {"error": "..."} with 400 for malformed requests and 404 for
// unknown editions, years, people or routes.
class ApiService {
 public:
  explicit ApiService(ServiceConfig config);
  ~ApiService();

  ApiResponse handle(std::string_view path, const std::multimap<std::string, std::string>& query) const;

  // Binds and blocks until stop(). Returns false when binding fails.
  bool serve();
  // Binds to an ephemeral port and returns it, or -1. Follow with serve_bound().
  int bind_any_port();
  bool serve_bound();
  void stop();

  const YearCache& cache() const { return cache_; }

 private:
  struct Edition {
    std::shared_ptr<const Bundle> bundle;
  };

  ApiResponse editions() const;
  ApiResponse network(const std::string& ed, std::string_view year, const std::multimap<std::string, std::string>& q) const;
  ApiResponse alltime(const std::string& ed, const std::multimap<std::string, std::string>& q) const;
  ApiResponse person(const std::string& ed, std::string_view id) const;
  ApiResponse report(const std::string& ed, std::string_view kind, const std::multimap<std::string, std::string>& q) const;
  ApiResponse compare(const std::multimap<std::string, std::string>& q) const;

  const Edition* find(const std::string& ed) const;
  void install_routes();

  ServiceConfig config_;
  std::map<std::string, Edition> editions_;
  mutable YearCache cache_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace chronograph

#endif  // CHRONOGRAPH_API_H_
