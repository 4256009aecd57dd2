// SPDX-License-Identifier: Apache-2.0
#include "deepforge/providers/fetch.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <set>
#include <vector>

#include "deepforge/common/text.hpp"
#include "deepforge/providers/url.hpp"

namespace deepforge {

namespace {

void append_utf8(std::string& out, char32_t cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF) || cp == 0) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct NamedEntity {
  std::string_view name;
  char32_t cp;
};

constexpr std::array<NamedEntity, 24> kEntities = {{
    {"amp", U'&'},      {"lt", U'<'},       {"gt", U'>'},       {"quot", U'"'},     {"apos", U'\''},
    {"nbsp", U' '},     {"ndash", U'–'}, {"mdash", U'—'}, {"hellip", U'…'}, {"copy", U'©'},
    {"reg", U'®'}, {"trade", U'™'}, {"deg", U'°'},  {"middot", U'·'}, {"lsquo", U'‘'},
    {"rsquo", U'’'}, {"ldquo", U'“'}, {"rdquo", U'”'}, {"times", U'×'}, {"sup3", U'³'},
    {"sup2", U'²'}, {"euro", U'€'}, {"laquo", U'«'}, {"raquo", U'»'},
}};

/// Decodes one entity starting at s[i] == '&'. Returns bytes consumed (0 if
/// this is not a recognizable entity).
std::size_t decode_entity(std::string_view s, std::size_t i, std::string& out) {
  const auto semi = s.find(';', i + 1);
  if (semi == std::string_view::npos || semi - i > 12) return 0;
  const std::string_view body = s.substr(i + 1, semi - i - 1);
  if (body.size() >= 2 && body[0] == '#') {
    unsigned long value = 0;
    const bool hex = body[1] == 'x' || body[1] == 'X';
    const std::string_view digits = body.substr(hex ? 2 : 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, hex ? 16 : 10);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) return 0;
    append_utf8(out, static_cast<char32_t>(value));
    return semi - i + 1;
  }
  for (const auto& e : kEntities) {
    if (body == e.name) {
      append_utf8(out, e.cp);
      return semi - i + 1;
    }
  }
  return 0;
}

const std::set<std::string, std::less<>>& skipped_elements() {
  static const std::set<std::string, std::less<>> k = {"script", "style", "noscript", "head", "template", "svg"};
  return k;
}

const std::set<std::string, std::less<>>& block_elements() {
  static const std::set<std::string, std::less<>> k = {
      "address", "article", "aside", "blockquote", "br",     "dd",     "div",   "dl",      "dt",
      "fieldset", "figcaption", "figure", "footer", "form", "h1",    "h2",    "h3",      "h4",
      "h5",      "h6",      "header", "hr",     "li",     "main",   "nav",   "ol",      "p",
      "pre",     "section", "table",  "tbody",  "thead",  "tfoot",  "tr",    "ul",      "title",
      "body",    "html",    "caption", "option", "summary", "details"};
  return k;
}

/// Finds the '>' that ends a tag opened at `lt`, skipping quoted values.
std::size_t tag_end(std::string_view s, std::size_t lt) {
  char quote = 0;
  for (std::size_t i = lt + 1; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      return i;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::string html_to_text(std::string_view html) {
  std::string raw;
  raw.reserve(html.size());
  std::size_t i = 0;
  while (i < html.size()) {
    const char c = html[i];
    if (c == '&') {
      if (const std::size_t n = decode_entity(html, i, raw)) {
        i += n;
        continue;
      }
      raw.push_back(c);
      ++i;
      continue;
    }
    if (c != '<') {
      raw.push_back(c);
      ++i;
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      const auto end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    std::size_t j = i + 1;
    const bool closing = j < html.size() && html[j] == '/';
    if (closing) ++j;
    const std::size_t name_start = j;
    while (j < html.size() && (std::isalnum(static_cast<unsigned char>(html[j])) || html[j] == '-')) ++j;
    if (j == name_start && !(name_start < html.size() && (html[name_start] == '!' || html[name_start] == '?'))) {
      // A bare '<' that does not start a tag is text.
      raw.push_back(c);
      ++i;
      continue;
    }
    const std::string name = text::casefold(html.substr(name_start, j - name_start));
    const std::size_t end = tag_end(html, i);
    if (end == std::string_view::npos) break;
    i = end + 1;
    const bool self_closing = end > 0 && html[end - 1] == '/';
    if (!closing && !self_closing && skipped_elements().count(name)) {
      const std::string close = "</" + name;
      std::size_t k = i;
      while (true) {
        k = html.find('<', k);
        if (k == std::string_view::npos) break;
        if (html.size() - k >= close.size() && text::casefold(html.substr(k, close.size())) == close) break;
        ++k;
      }
      if (k == std::string_view::npos) {
        i = html.size();
      } else {
        const std::size_t close_end = tag_end(html, k);
        i = close_end == std::string_view::npos ? html.size() : close_end + 1;
      }
      continue;
    }
    if (block_elements().count(name)) {
      raw.push_back('\n');
    } else if (name == "td" || name == "th") {
      raw.push_back(' ');
    }
  }

  std::vector<std::string> lines;
  for (const auto& line : text::split_lines(raw)) {
    std::string collapsed = text::collapse_whitespace(line);
    if (!collapsed.empty()) lines.push_back(std::move(collapsed));
  }
  return text::join(lines, "\n");
}

std::string media_type(std::string_view content_type) {
  const auto semi = content_type.find(';');
  return text::casefold(text::trim(content_type.substr(0, semi)));
}

PageFetcher::PageFetcher(std::shared_ptr<FetchBackend> backend, std::shared_ptr<CallGuard> guard)
    : backend_(std::move(backend)), guard_(std::move(guard)) {}

std::string PageFetcher::fetch_and_clean(const std::string& url, const CancelToken* cancel) const {
  if (!is_valid_url(url)) throw PreconditionError("not a valid http(s) URL: " + url);
  FetchedDocument doc = guard_->run(
      [&] {
        FetchedDocument d = backend_->fetch(url);
        if (d.status < 200 || d.status >= 300) throw FetchFailure(d.status, url);
        return d;
      },
      cancel);
  const std::string type = media_type(doc.content_type);
  if (type.empty() || type == "text/html" || type == "application/xhtml+xml") return html_to_text(doc.body);
  if (type == "text/plain") {
    std::vector<std::string> lines;
    for (const auto& line : text::split_lines(doc.body)) {
      std::string collapsed = text::collapse_whitespace(line);
      if (!collapsed.empty()) lines.push_back(std::move(collapsed));
    }
    return text::join(lines, "\n");
  }
  throw ProviderError("NonHtmlContent", "unsupported content type '" + type + "' for " + url);
}

}  // namespace deepforge
