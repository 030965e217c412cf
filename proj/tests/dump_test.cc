#include <sys/resource.h>

#include <sstream>
#include <streambuf>

#include <doctest.h>

#include "chronograph/dump.h"
#include "chronograph/errors.h"

using namespace chronograph;

namespace {

std::string wrap(const std::string& pages) { return "<mediawiki>" + pages + "</mediawiki>"; }

std::string page(const std::string& title, const std::string& text, const std::string& extra = "") {
  return "<page><title>" + title + "</title><ns>0</ns>" + extra + "<revision><text>" + text +
         "</text></revision></page>";
}

std::vector<RawPage> parse(const std::string& xml, DumpStats* stats = nullptr, DumpOptions options = {}) {
  std::istringstream in(xml);
  return parse_dump(in, stats, options);
}

// Produces a synthetic dump of `pages` pages without holding it in memory.
class GeneratedDump : public std::streambuf {
 public:
  GeneratedDump(int pages, std::size_t text_bytes) : pages_(pages), filler_(text_bytes, 'x') {
    chunk_ = "<mediawiki>";
    setg(chunk_.data(), chunk_.data(), chunk_.data() + chunk_.size());
  }

 protected:
  int_type underflow() override {
    if (next_ > pages_) return traits_type::eof();
    if (next_ == pages_) {
      chunk_ = "</mediawiki>";
    } else {
      chunk_ = "<page><title>Page " + std::to_string(next_) +
               "</title><revision><text>[[Page 1]] [[Category:10 births]] " + filler_ +
               "</text></revision></page>\n";
    }
    ++next_;
    setg(chunk_.data(), chunk_.data(), chunk_.data() + chunk_.size());
    return traits_type::to_int_type(chunk_[0]);
  }

 private:
  int pages_;
  int next_ = 0;
  std::string filler_;
  std::string chunk_;
};

long peak_rss_kb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss;
}

}  // namespace

TEST_CASE("piped links keep the target before the pipe") {
  auto pages = parse(wrap(page("Plutarch", "[[Hadrian]] fought [[Nero|the emperor]]")));
  REQUIRE(pages.size() == 1);
  CHECK(pages[0].wikilinks == std::vector<std::string>{"Hadrian", "Nero"});
  CHECK(pages[0].categories.empty());
  CHECK_FALSE(pages[0].redirect_target);
}

TEST_CASE("category links become categories, not wikilinks") {
  auto pages = parse(wrap(page("Plutarch", "[[Category:46 births]][[Category:120 deaths]]")));
  CHECK(pages[0].categories == std::vector<std::string>{"46 births", "120 deaths"});
  CHECK(pages[0].wikilinks.empty());
}

TEST_CASE("redirect pages carry the target and no links") {
  auto pages = parse(wrap(page("Caesar", "#REDIRECT [[Gaius Julius Caesar]] [[Category:Redirects]]",
                               "<redirect title=\"Gaius Julius Caesar\"/>")));
  REQUIRE(pages.size() == 1);
  REQUIRE(pages[0].redirect_target);
  CHECK(*pages[0].redirect_target == "Gaius Julius Caesar");
  CHECK(pages[0].wikilinks.empty());
  CHECK(pages[0].categories.empty());
}

TEST_CASE("link grammar details") {
  std::vector<std::string> links, cats;
  SUBCASE("section anchors are stripped and the first letter upper-cased") {
    extract_links("[[nero#Legacy|x]] [[#Early life]] [[augustus]]", links, cats);
    CHECK(links == std::vector<std::string>{"Nero", "Augustus"});
  }
  SUBCASE("underscores and extra spaces normalize") {
    extract_links("[[William_Shakespeare]] [[  Sidney   Lee ]]", links, cats);
    CHECK(links == std::vector<std::string>{"William Shakespeare", "Sidney Lee"});
  }
  SUBCASE("category sort keys are dropped and the colon trick links") {
    extract_links("[[Category:1859 births|Lee, Sidney]] [[:Category:Biographers]] [[category:1926 deaths]]",
                  links, cats);
    CHECK(cats == std::vector<std::string>{"1859 births", "1926 deaths"});
    CHECK(links == std::vector<std::string>{"Category:Biographers"});
  }
  SUBCASE("links nested in captions are found") {
    extract_links("[[File:Bust.jpg|thumb|Bust of [[Hadrian]]]]", links, cats);
    CHECK(links == std::vector<std::string>{"Hadrian", "File:Bust.jpg"});
  }
  SUBCASE("unbalanced brackets are ignored") {
    extract_links("]] [[Nero [[Hadrian]]", links, cats);
    CHECK(links == std::vector<std::string>{"Hadrian"});
  }
}

TEST_CASE("entities and CDATA decode") {
  auto pages = parse(wrap(page("A &amp; B", "&lt;ref&gt;[[Hadrian]]&lt;/ref&gt; &#91;&#x5B;x]] <![CDATA[[[Nero]] <b>]]>")));
  REQUIRE(pages.size() == 1);
  CHECK(pages[0].title == "A & B");
  CHECK(pages[0].wikilinks == std::vector<std::string>{"Hadrian", "X", "Nero"});
}

TEST_CASE("siteinfo, comments, declarations and multiple revisions") {
  std::string xml = "<?xml version=\"1.0\"?>\n<!-- dump -->\n<mediawiki><siteinfo><sitename>W</sitename>"
                    "<namespaces><namespace key=\"0\"/></namespaces></siteinfo>"
                    "<page><title>Nero</title><revision><text>[[Old]]</text></revision>"
                    "<revision><text xml:space='preserve'>[[New]]</text></revision></page></mediawiki>\n";
  DumpStats stats;
  auto pages = parse(xml, &stats);
  REQUIRE(pages.size() == 1);
  CHECK(pages[0].wikilinks == std::vector<std::string>{"New"});
  CHECK(stats.pages == 1);
}

TEST_CASE("malformed XML reports the byte offset") {
  auto offset_of = [](const std::string& xml) -> std::int64_t {
    try {
      parse(xml);
    } catch (const XmlError& e) {
      return static_cast<std::int64_t>(e.offset());
    }
    return -1;
  };
  // Mismatched close: the scanner stops right after reading "</titel>".
  const std::string mismatched = "<mediawiki><page><title>X</titel></page></mediawiki>";
  CHECK(offset_of(mismatched) == static_cast<std::int64_t>(mismatched.find("</titel>") + 8));
  CHECK(offset_of("<mediawiki><page><title>X</title>") >= 0);       // truncated
  CHECK(offset_of("<mediawiki>&bogus;</mediawiki>") == 11);         // unknown entity
  CHECK(offset_of("") == 0);                                        // no root
  CHECK(offset_of("<a></a><b></b>") >= 0);                          // two roots
  CHECK(offset_of("<mediawiki><page><title>A</title></page></mediawiki>junk") >= 0);
  CHECK_THROWS_AS(parse(wrap("<page><revision><text>x</text></revision></page>")), XmlError);
}

TEST_CASE("oversized pages are skipped and counted") {
  DumpOptions options;
  options.max_page_bytes = 16;
  DumpStats stats;
  auto pages = parse(wrap(page("Small", "[[A]]") + page("Big", std::string(100, 'y') + "[[B]]") + page("After", "[[C]]")),
                     &stats, options);
  REQUIRE(pages.size() == 2);
  CHECK(pages[0].title == "Small");
  CHECK(pages[1].title == "After");
  CHECK(stats.oversized_pages == 1);
  CHECK(stats.pages == 3);
}

TEST_CASE("chunk boundaries do not change the result") {
  std::string xml = wrap(page("Plutarch", "&lt;[[Hadrian]]&gt; [[Nero|x]] [[Category:46 births]]") +
                         page("Caesar", "", "<redirect title=\"Julius Caesar\"/>"));
  auto reference = parse(xml);
  for (std::size_t chunk : {1u, 2u, 3u, 7u, 64u}) {
    DumpOptions options;
    options.read_chunk = chunk;
    auto pages = parse(xml, nullptr, options);
    REQUIRE(pages.size() == reference.size());
    for (std::size_t i = 0; i < pages.size(); ++i) {
      CHECK(pages[i].title == reference[i].title);
      CHECK(pages[i].wikilinks == reference[i].wikilinks);
      CHECK(pages[i].categories == reference[i].categories);
      CHECK(pages[i].redirect_target == reference[i].redirect_target);
    }
  }
}

TEST_CASE("memory stays bounded by page size on a 100 MB dump") {
  // 25,000 pages of ~4 KB each; pages are dropped by the sink immediately.
  GeneratedDump source(25'000, 4'000);
  std::istream in(&source);
  const long before = peak_rss_kb();
  std::int64_t seen = 0;
  DumpStats stats = parse_dump(in, [&](RawPage&& p) {
    ++seen;
    CHECK_FALSE(p.wikilinks.empty());
  });
  const long growth_mb = (peak_rss_kb() - before) / 1024;
  CHECK(seen == 25'000);
  CHECK(stats.bytes > 100'000'000u);
  MESSAGE("peak RSS growth while streaming: " << growth_mb << " MB");
  CHECK(growth_mb < 32);
}
