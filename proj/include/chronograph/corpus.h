#ifndef CHRONOGRAPH_CORPUS_H_
#define CHRONOGRAPH_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chronograph {

// Years are astronomical integers: 0 is 1 BC, -1 is 2 BC.
using Year = int;
using PersonId = std::int32_t;

struct Horizon {
  Year start = -3000;
  Year end = 1950;

  bool contains(Year y) const { return start <= y && y <= end; }
  int size() const { return end - start + 1; }
  bool operator==(const Horizon&) const = default;
};

enum class Occupation { kPolitician, kReligious, kArtistScientist, kOther };

inline constexpr Occupation kAllOccupations[] = {
    Occupation::kPolitician, Occupation::kReligious,
    Occupation::kArtistScientist, Occupation::kOther};

std::string_view occupation_name(Occupation o);
std::optional<Occupation> parse_occupation(std::string_view s);

// Normalizes a page title or link target: trims whitespace, maps '_' to ' ',
// collapses runs of spaces and upper-cases an ASCII first character.
std::string normalize_title(std::string_view title);

// Default cross-edition identity key for a title ("Julius Caesar" ->
// "Julius_Caesar").
std::string identity_key(std::string_view title);

struct RawPage {
  std::string title;
  std::optional<std::string> redirect_target;
  std::vector<std::string> wikilinks;
  std::vector<std::string> categories;
};

struct Person {
  PersonId id = 0;
  std::string title;
  Year birth = 0;
  Year death = 0;
  Occupation occupation = Occupation::kOther;
  std::string culture = "unknown";
  // Cross-edition identity key from annotations; empty means identity_key(title).
  std::string key;

  bool alive_in(Year y) const { return birth <= y && y <= death; }
  std::string effective_key() const {
    return key.empty() ? identity_key(title) : key;
  }
  bool operator==(const Person&) const = default;
};

struct CorpusStats {
  std::int64_t pages_seen = 0;
  std::int64_t redirects = 0;
  std::int64_t undated = 0;
  std::int64_t invalid_dates = 0;
  std::int64_t out_of_horizon = 0;
  std::int64_t multiple_dates = 0;
  std::int64_t oversized_pages = 0;
  std::int64_t dangling_links = 0;
  std::int64_t self_links = 0;
  std::int64_t duplicate_links = 0;
  std::int64_t redirect_cycles = 0;
  std::int64_t unknown_occupations = 0;

  bool operator==(const CorpusStats&) const = default;
};

// Serialized names of the CorpusStats counters, in file order.
inline constexpr std::pair<std::string_view, std::int64_t CorpusStats::*> kStatsFields[] = {
    {"pages_seen", &CorpusStats::pages_seen},
    {"redirects", &CorpusStats::redirects},
    {"undated", &CorpusStats::undated},
    {"invalid_dates", &CorpusStats::invalid_dates},
    {"out_of_horizon", &CorpusStats::out_of_horizon},
    {"multiple_dates", &CorpusStats::multiple_dates},
    {"oversized_pages", &CorpusStats::oversized_pages},
    {"dangling_links", &CorpusStats::dangling_links},
    {"self_links", &CorpusStats::self_links},
    {"duplicate_links", &CorpusStats::duplicate_links},
    {"redirect_cycles", &CorpusStats::redirect_cycles},
    {"unknown_occupations", &CorpusStats::unknown_occupations},
};

// Every link endpoint is a valid person id, there are no self-links and no
// duplicate pairs. Links are kept sorted by (src, dst).
struct Corpus {
  std::string edition = "en";
  Horizon horizon;
  std::vector<Person> persons;
  std::vector<std::pair<PersonId, PersonId>> links;
  CorpusStats stats;

  bool operator==(const Corpus&) const = default;
};

// Birth year plus death year, or no death year when the person is alive.
struct LifeDates {
  Year birth = 0;
  std::optional<Year> death;
  // More than one birth or death category was present.
  bool ambiguous = false;
  bool operator==(const LifeDates&) const = default;
};

// Reads "N births", "N BC births", "N deaths" and "N BC deaths" categories.
// Returns nothing when there is no birth category.
std::optional<LifeDates> extract_dates(std::span<const std::string> categories);

struct Annotation {
  Occupation occupation = Occupation::kOther;
  std::string culture = "unknown";
  std::string key;
};

struct Annotations {
  std::map<std::string, Annotation> by_title;
  std::int64_t unknown_occupations = 0;
};

Annotations load_annotations(const std::filesystem::path& path);

struct ResolveOptions {
  std::string edition = "en";
  Horizon horizon;
  const Annotations* annotations = nullptr;
};

inline constexpr int kMaxRedirectDepth = 16;

// Turns raw pages into a validated corpus. Throws InputError on duplicate
// titles and EmptyCorpusError when no dated person survives.
Corpus resolve(std::span<const RawPage> pages, const ResolveOptions& options);

// Applies annotations to an already resolved corpus.
void annotate(Corpus& corpus, const Annotations& annotations);

// Checks every Corpus invariant; throws InputError naming the offender.
void validate(const Corpus& corpus);

inline constexpr std::string_view kCorpusFormat = "chronograph-corpus-v1";

Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view text);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);

}  // namespace chronograph

#endif  // CHRONOGRAPH_CORPUS_H_
