#include "chronograph/dump.h"

#include <algorithm>
#include <cctype>
#include <string>
#include <utility>

#include "chronograph/errors.h"

namespace chronograph {
namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

// Handles one [[...]] body. Possible forms:
//
//    [[Target]]
//    [[Target|label]]
//    [[Target#section|label]]
//    [[Category:Name]] / [[Category:Name|sort key]]
//    [[:Category:Name]]  (colon trick: a plain link, not a categorization)
//    [[#section]]  (link into the current page, ignored)
void handle_link(std::string_view body, std::vector<std::string>& wikilinks,
                 std::vector<std::string>& categories) {
  bool colon = false;
  if (!body.empty() && body.front() == ':') {
    colon = true;
    body.remove_prefix(1);
  }
  std::string_view target = body.substr(0, body.find('|'));
  if (!colon && starts_with_ci(target, "category:")) {
    target.remove_prefix(9);
    std::string name = normalize_title(target);
    if (!name.empty()) categories.push_back(std::move(name));
    return;
  }
  target = target.substr(0, target.find('#'));
  std::string normalized = normalize_title(target);
  if (!normalized.empty()) wikilinks.push_back(std::move(normalized));
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Minimal pull tokenizer over the XML subset MediaWiki exports use: elements,
// attributes, character data, entities, CDATA, comments, processing
// instructions and a DOCTYPE. Reads the stream in fixed-size chunks.
class XmlScanner {
 public:
  XmlScanner(std::istream& in, std::size_t chunk) : in_(in), chunk_(chunk) {}

  std::uint64_t offset() const { return base_ + pos_; }

  int peek() {
    if (pos_ == buf_.size() && !refill()) return -1;
    return static_cast<unsigned char>(buf_[pos_]);
  }

  int get() {
    int c = peek();
    if (c >= 0) ++pos_;
    return c;
  }

  int expect_char() {
    int c = get();
    if (c < 0) fail("unexpected end of input");
    return c;
  }

  void expect(std::string_view s) {
    for (char ch : s) {
      if (expect_char() != static_cast<unsigned char>(ch)) {
        fail("expected '" + std::string(s) + "'");
      }
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw XmlError(what, offset());
  }

  void skip_space() {
    while (true) {
      int c = peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::string read_name() {
    std::string name;
    while (true) {
      int c = peek();
      if (c < 0) fail("unexpected end of input in name");
      if (std::isalnum(c) || c == '_' || c == ':' || c == '-' || c == '.' ||
          c >= 0x80) {
        name += static_cast<char>(c);
        ++pos_;
      } else {
        break;
      }
    }
    if (name.empty()) fail("expected a name");
    return name;
  }

  // Decodes an entity reference; the '&' has already been consumed.
  void read_entity(std::string& out) {
    std::uint64_t at = offset() - 1;
    std::string ref;
    while (true) {
      int c = expect_char();
      if (c == ';') break;
      if (ref.size() > 16) throw XmlError("unterminated entity", at);
      ref += static_cast<char>(c);
    }
    if (ref == "lt") {
      out += '<';
    } else if (ref == "gt") {
      out += '>';
    } else if (ref == "amp") {
      out += '&';
    } else if (ref == "quot") {
      out += '"';
    } else if (ref == "apos") {
      out += '\'';
    } else if (ref.size() > 1 && ref[0] == '#') {
      bool hex = ref[1] == 'x' || ref[1] == 'X';
      std::string_view digits = std::string_view(ref).substr(hex ? 2 : 1);
      if (digits.empty()) throw XmlError("bad character reference", at);
      std::uint32_t cp = 0;
      for (char d : digits) {
        int v;
        if (d >= '0' && d <= '9') {
          v = d - '0';
        } else if (hex && d >= 'a' && d <= 'f') {
          v = d - 'a' + 10;
        } else if (hex && d >= 'A' && d <= 'F') {
          v = d - 'A' + 10;
        } else {
          throw XmlError("bad character reference", at);
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        if (cp > 0x10FFFF) throw XmlError("bad character reference", at);
      }
      append_utf8(out, cp);
    } else {
      throw XmlError("unknown entity '&" + ref + ";'", at);
    }
  }

  // Skips up to and including `terminator`.
  void skip_until(std::string_view terminator) {
    std::size_t matched = 0;
    while (matched < terminator.size()) {
      int c = get();
      if (c < 0) fail("unexpected end of input");
      if (c == static_cast<unsigned char>(terminator[matched])) {
        ++matched;
      } else {
        matched = (c == static_cast<unsigned char>(terminator[0])) ? 1 : 0;
      }
    }
  }

  // Copies raw bytes up to `terminator` into `out` (unless null).
  void copy_until(std::string_view terminator, std::string* out,
                  std::size_t cap, bool* overflow) {
    std::size_t matched = 0;
    while (matched < terminator.size()) {
      int c = get();
      if (c < 0) fail("unexpected end of input");
      if (c == static_cast<unsigned char>(terminator[matched])) {
        ++matched;
        continue;
      }
      if (out && matched > 0) emit(out, terminator.substr(0, matched), cap, overflow);
      matched = 0;
      if (c == static_cast<unsigned char>(terminator[0])) {
        matched = 1;
      } else if (out) {
        char ch = static_cast<char>(c);
        emit(out, std::string_view(&ch, 1), cap, overflow);
      }
    }
  }

  static void emit(std::string* out, std::string_view s, std::size_t cap,
                   bool* overflow) {
    if (*overflow) return;
    if (out->size() + s.size() > cap) {
      *overflow = true;
      out->clear();
      out->shrink_to_fit();
      return;
    }
    out->append(s);
  }

 private:
  bool refill() {
    if (!in_) return false;
    base_ += buf_.size();
    buf_.resize(chunk_);
    in_.read(buf_.data(), static_cast<std::streamsize>(chunk_));
    buf_.resize(static_cast<std::size_t>(in_.gcount()));
    pos_ = 0;
    return !buf_.empty();
  }

  std::istream& in_;
  std::size_t chunk_;
  std::string buf_;
  std::size_t pos_ = 0;
  std::uint64_t base_ = 0;
};

struct Tag {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  bool closing = false;
  bool self_closing = false;

  const std::string* attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

class DumpReader {
 public:
  DumpReader(std::istream& in, const std::function<void(RawPage&&)>& sink,
             const DumpOptions& options)
      : scan_(in, std::max<std::size_t>(options.read_chunk, 1)),
        sink_(sink),
        options_(options) {}

  DumpStats run() {
    bool seen_root = false;
    while (true) {
      int c = scan_.peek();
      if (c < 0) break;
      if (c == '<') {
        scan_.get();
        if (read_markup()) seen_root = true;
      } else {
        read_text();
      }
    }
    if (!stack_.empty()) scan_.fail("unexpected end of input inside <" + stack_.back() + ">");
    if (!seen_root) scan_.fail("no root element");
    stats_.bytes = scan_.offset();
    return stats_;
  }

 private:
  enum class Capture { kNone, kTitle, kText };

  std::string* capture_target() {
    switch (capture_) {
      case Capture::kTitle: return &title_;
      case Capture::kText: return &text_;
      case Capture::kNone: break;
    }
    return nullptr;
  }

  std::size_t capture_cap() const {
    return capture_ == Capture::kText ? options_.max_page_bytes
                                      : options_.max_page_bytes + 4096;
  }

  bool* capture_overflow() {
    return capture_ == Capture::kText ? &text_overflow_ : &title_overflow_;
  }

  void read_text() {
    std::string* out = capture_target();
    std::string decoded;
    while (true) {
      int c = scan_.peek();
      if (c < 0 || c == '<') break;
      scan_.get();
      // Only whitespace may appear outside the root element.
      if (stack_.empty() && !(c == ' ' || c == '\t' || c == '\n' || c == '\r')) {
        scan_.fail("character data outside the root element");
      }
      if (c == '&') {
        decoded.clear();
        scan_.read_entity(decoded);
        if (out) XmlScanner::emit(out, decoded, capture_cap(), capture_overflow());
      } else if (out) {
        char ch = static_cast<char>(c);
        XmlScanner::emit(out, std::string_view(&ch, 1), capture_cap(),
                         capture_overflow());
      }
    }
  }

  // Reads markup after '<'. Returns true when an element start tag was read.
  bool read_markup() {
    int c = scan_.peek();
    if (c == '?') {
      scan_.skip_until("?>");
      return false;
    }
    if (c == '!') {
      scan_.get();
      int d = scan_.peek();
      if (d == '-') {
        scan_.expect("--");
        scan_.skip_until("-->");
      } else if (d == '[') {
        scan_.expect("[CDATA[");
        if (stack_.empty()) scan_.fail("CDATA outside the root element");
        scan_.copy_until("]]>", capture_target(), capture_cap(),
                         capture_overflow());
      } else {
        scan_.expect("DOCTYPE");
        skip_doctype();
      }
      return false;
    }
    Tag tag = read_tag();
    if (tag.closing) {
      if (stack_.empty() || stack_.back() != tag.name) {
        scan_.fail("mismatched closing tag </" + tag.name + ">");
      }
      close_element(tag.name);
      stack_.pop_back();
      return false;
    }
    if (stack_.empty() && root_closed_) scan_.fail("second root element");
    stack_.push_back(tag.name);
    open_element(tag);
    if (tag.self_closing) {
      close_element(tag.name);
      stack_.pop_back();
    }
    return true;
  }

  void skip_doctype() {
    int depth = 0;
    while (true) {
      int c = scan_.expect_char();
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == '>' && depth <= 0) return;
    }
  }

  Tag read_tag() {
    Tag tag;
    if (scan_.peek() == '/') {
      scan_.get();
      tag.closing = true;
      tag.name = scan_.read_name();
      scan_.skip_space();
      if (scan_.expect_char() != '>') scan_.fail("expected '>'");
      return tag;
    }
    tag.name = scan_.read_name();
    while (true) {
      scan_.skip_space();
      int c = scan_.expect_char();
      if (c == '>') return tag;
      if (c == '/') {
        if (scan_.expect_char() != '>') scan_.fail("expected '>'");
        tag.self_closing = true;
        return tag;
      }
      std::string key(1, static_cast<char>(c));
      if (!(std::isalpha(c) || c == '_' || c == ':')) scan_.fail("bad attribute");
      key += scan_.peek() == '=' ? std::string() : scan_.read_name();
      scan_.skip_space();
      if (scan_.expect_char() != '=') scan_.fail("expected '=' after attribute");
      scan_.skip_space();
      int quote = scan_.expect_char();
      if (quote != '"' && quote != '\'') scan_.fail("expected quoted attribute value");
      std::string value;
      while (true) {
        int v = scan_.expect_char();
        if (v == quote) break;
        if (v == '<') scan_.fail("'<' in attribute value");
        if (v == '&') {
          scan_.read_entity(value);
        } else {
          value += static_cast<char>(v);
        }
      }
      tag.attributes.emplace_back(std::move(key), std::move(value));
    }
  }

  bool parent_is(std::string_view name) const {
    return stack_.size() >= 2 && stack_[stack_.size() - 2] == name;
  }

  void open_element(const Tag& tag) {
    if (tag.name == "page") {
      if (in_page_) scan_.fail("nested <page>");
      in_page_ = true;
      page_start_ = scan_.offset();
      title_.clear();
      text_.clear();
      redirect_.reset();
      title_overflow_ = text_overflow_ = false;
      has_title_ = false;
      return;
    }
    if (!in_page_) return;
    if (tag.name == "title" && parent_is("page")) {
      title_.clear();
      has_title_ = true;
      capture_ = Capture::kTitle;
    } else if (tag.name == "redirect" && parent_is("page")) {
      const std::string* target = tag.attribute("title");
      redirect_ = target ? *target : std::string();
    } else if (tag.name == "text" && parent_is("revision")) {
      // Dumps with full history carry several revisions; the last one wins.
      text_.clear();
      text_overflow_ = false;
      capture_ = Capture::kText;
    }
  }

  void close_element(const std::string& name) {
    if (stack_.size() == 1) root_closed_ = true;
    if (!in_page_) return;
    if ((name == "title" && capture_ == Capture::kTitle) ||
        (name == "text" && capture_ == Capture::kText)) {
      capture_ = Capture::kNone;
      return;
    }
    if (name != "page") return;
    in_page_ = false;
    ++stats_.pages;
    if (!has_title_ || normalize_title(title_).empty()) {
      throw XmlError("<page> without a title", page_start_);
    }
    if (text_overflow_ || title_overflow_) {
      ++stats_.oversized_pages;
      return;
    }
    RawPage page;
    page.title = normalize_title(title_);
    if (redirect_) {
      page.redirect_target = normalize_title(*redirect_);
    } else {
      extract_links(text_, page.wikilinks, page.categories);
    }
    text_.clear();
    sink_(std::move(page));
  }

  XmlScanner scan_;
  const std::function<void(RawPage&&)>& sink_;
  const DumpOptions& options_;
  DumpStats stats_;

  std::vector<std::string> stack_;
  bool root_closed_ = false;
  bool in_page_ = false;
  std::uint64_t page_start_ = 0;
  Capture capture_ = Capture::kNone;
  bool has_title_ = false;
  std::string title_;
  std::string text_;
  bool title_overflow_ = false;
  bool text_overflow_ = false;
  std::optional<std::string> redirect_;
};

}  // namespace

void extract_links(std::string_view text, std::vector<std::string>& wikilinks,
                   std::vector<std::string>& categories) {
  std::vector<std::size_t> starts;
  std::size_t pos = 0;
  while (pos + 1 < text.size()) {
    if (text[pos] == '[' && text[pos + 1] == '[') {
      pos += 2;
      starts.push_back(pos);
    } else if (text[pos] == ']' && text[pos + 1] == ']') {
      if (!starts.empty()) {
        std::size_t start = starts.back();
        starts.pop_back();
        handle_link(text.substr(start, pos - start), wikilinks, categories);
      }
      pos += 2;
    } else {
      ++pos;
    }
  }
}

DumpStats parse_dump(std::istream& in,
                     const std::function<void(RawPage&&)>& sink,
                     const DumpOptions& options) {
  DumpReader reader(in, sink, options);
  return reader.run();
}

std::vector<RawPage> parse_dump(std::istream& in, DumpStats* stats,
                                const DumpOptions& options) {
  std::vector<RawPage> pages;
  DumpStats s = parse_dump(
      in, [&](RawPage&& p) { pages.push_back(std::move(p)); }, options);
  if (stats) *stats = s;
  return pages;
}

}  // namespace chronograph
