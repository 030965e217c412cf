#ifndef CHRONOGRAPH_DUMP_H_
#define CHRONOGRAPH_DUMP_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <string_view>
#include <vector>

#include "chronograph/corpus.h"

namespace chronograph {

struct DumpOptions {
  // Pages whose <text> exceeds this many bytes are skipped.
  std::size_t max_page_bytes = 8u << 20;
  std::size_t read_chunk = 64u << 10;
};

struct DumpStats {
  std::int64_t pages = 0;
  std::int64_t oversized_pages = 0;
  std::uint64_t bytes = 0;
};

// Wikitext extraction for a single page body. Links inside other links (image
// captions) are found too.
void extract_links(std::string_view text, std::vector<std::string>& wikilinks,
                   std::vector<std::string>& categories);

// Streams a MediaWiki XML export and hands each page to `sink` as soon as its
// closing tag is read. Only the current page is buffered. Throws XmlError on
// malformed input.
DumpStats parse_dump(std::istream& in,
                     const std::function<void(RawPage&&)>& sink,
                     const DumpOptions& options = {});

std::vector<RawPage> parse_dump(std::istream& in, DumpStats* stats = nullptr,
                                const DumpOptions& options = {});

}  // namespace chronograph

#endif  // CHRONOGRAPH_DUMP_H_
