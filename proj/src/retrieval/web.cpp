#include "nugget/retrieval/web.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "nugget/core/error.hpp"
#include "nugget/core/json.hpp"
#include "nugget/core/text.hpp"
#include "nugget/retrieval/segment.hpp"

namespace nugget::retrieval {

namespace {

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x110000) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Decodes the entity starting at html[pos] == '&'. Returns the characters
// consumed, or 0 when it is not a recognised entity.
std::size_t decode_entity(std::string_view html, std::size_t pos, std::string& out) {
  const auto semi = html.find(';', pos);
  if (semi == std::string_view::npos || semi - pos > 10) return 0;
  const auto name = html.substr(pos + 1, semi - pos - 1);
  static const std::pair<std::string_view, std::string_view> named[] = {
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "}};
  for (const auto& [n, v] : named)
    if (name == n) {
      out += v;
      return semi - pos + 1;
    }
  if (name.size() > 1 && name[0] == '#') {
    try {
      const bool hex = name[1] == 'x' || name[1] == 'X';
      const unsigned long cp = std::stoul(std::string(name.substr(hex ? 2 : 1)), nullptr, hex ? 16 : 10);
      append_utf8(out, cp);
      return semi - pos + 1;
    } catch (const std::exception&) {
      return 0;
    }
  }
  return 0;
}

bool is_block_tag(std::string_view tag) {
  static const std::set<std::string_view> blocks{"p",  "div", "br", "li", "ul", "ol", "h1", "h2", "h3", "h4",
                                                 "h5", "h6", "tr", "table", "section", "article", "header",
                                                 "footer", "blockquote", "pre", "title", "hr"};
  return blocks.contains(tag);
}

std::string host_of(const std::string& url) {
  try {
    return net::parse_url(url).origin;
  } catch (const Error&) {
    return url;
  }
}

}  // namespace

std::string html_to_text(std::string_view html) {
  std::string out;
  out.reserve(html.size() / 2);
  std::size_t pos = 0;
  while (pos < html.size()) {
    const char c = html[pos];
    if (c == '&') {
      if (auto used = decode_entity(html, pos, out)) {
        pos += used;
        continue;
      }
      out += c;
      ++pos;
      continue;
    }
    if (c != '<') {
      out += c;
      ++pos;
      continue;
    }
    if (html.substr(pos, 4) == "<!--") {
      const auto end = html.find("-->", pos + 4);
      pos = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    const auto close = html.find('>', pos);
    if (close == std::string_view::npos) break;
    std::string_view inner = html.substr(pos + 1, close - pos - 1);
    const bool closing = !inner.empty() && inner.front() == '/';
    if (closing) inner.remove_prefix(1);
    std::size_t name_end = 0;
    while (name_end < inner.size() && std::isalnum(static_cast<unsigned char>(inner[name_end]))) ++name_end;
    const std::string tag = text::to_lower(inner.substr(0, name_end));
    pos = close + 1;
    if (!closing && (tag == "script" || tag == "style" || tag == "head" || tag == "noscript")) {
      const std::string end_tag = "</" + tag;
      std::size_t search = pos;
      std::size_t end = std::string_view::npos;
      while (search < html.size()) {
        const auto lt = html.find("</", search);
        if (lt == std::string_view::npos) break;
        if (text::starts_with_ci(html.substr(lt), end_tag)) {
          end = lt;
          break;
        }
        search = lt + 2;
      }
      if (end == std::string_view::npos) break;
      const auto gt = html.find('>', end);
      pos = gt == std::string_view::npos ? html.size() : gt + 1;
      continue;
    }
    out += is_block_tag(tag) ? "\n\n" : " ";
  }
  // Collapse spaces inside lines, keep paragraph breaks.
  std::string result;
  for (auto line : text::split_lines(out)) {
    auto collapsed = text::collapse_whitespace(line);
    if (collapsed.empty()) {
      if (!result.empty() && !result.ends_with("\n\n")) result += "\n\n";
      continue;
    }
    if (!result.empty() && !result.ends_with("\n\n")) result += ' ';
    result += collapsed;
  }
  while (result.ends_with('\n')) result.pop_back();
  return result;
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

HttpSearchProvider::HttpSearchProvider(net::HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  net::parse_url(endpoint_.url);
}

std::vector<SearchResult> HttpSearchProvider::search(const std::string& query, std::size_t max_results) {
  const char sep = endpoint_.url.find('?') == std::string::npos ? '?' : '&';
  const auto url = endpoint_.url + sep + "q=" + url_encode(query) + "&n=" + std::to_string(max_results);
  const auto body = net::get(url, endpoint_.timeout, endpoint_.max_retries, ErrorCode::ProviderUnavailable);
  std::vector<SearchResult> out;
  try {
    auto parsed = Json::parse(body);
    const Json& list = parsed.is_object() ? parsed.at("results") : parsed;
    for (const auto& item : list)
      out.push_back({item.at("url").get<std::string>(), item.value("title", std::string()),
                     item.value("snippet", std::string())});
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ProviderUnavailable, std::string("malformed search response: ") + e.what());
  }
  return out;
}

HttpPageReader::HttpPageReader(std::chrono::milliseconds timeout, std::chrono::milliseconds politeness)
    : timeout_(timeout), politeness_(politeness) {}

std::string HttpPageReader::read(const std::string& url) {
  const auto host = host_of(url);
  {
    std::unique_lock lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    auto it = std::find_if(last_hit_.begin(), last_hit_.end(), [&](const auto& e) { return e.first == host; });
    auto wait = std::chrono::steady_clock::duration::zero();
    if (it != last_hit_.end() && it->second + politeness_ > now) wait = it->second + politeness_ - now;
    if (it == last_hit_.end())
      last_hit_.emplace_back(host, now + wait);
    else
      it->second = now + wait;
    lock.unlock();
    if (wait > wait.zero()) std::this_thread::sleep_for(wait);
  }
  return html_to_text(net::get(url, timeout_, 1, ErrorCode::ProviderUnavailable));
}

std::vector<Passage> web_fetch(SearchProvider& provider, PageReader& reader, const std::string& query,
                               std::size_t max_pages, std::size_t min_sentences, std::size_t max_sentences) {
  if (max_pages == 0) throw Error(ErrorCode::ConfigError, "web_fetch needs max_pages >= 1");
  auto results = provider.search(query, max_pages);
  if (results.size() > max_pages) results.resize(max_pages);
  std::vector<Passage> out;
  std::set<std::string> seen;
  for (const auto& result : results) {
    std::string page;
    try {
      page = reader.read(result.url);
    } catch (const std::exception& e) {
      spdlog::warn("skipping {}: {}", result.url, e.what());
      continue;
    }
    for (auto& window : segment_text(page, min_sentences, max_sentences)) {
      auto passage = Passage::make(std::move(window), WebSource{result.url});
      if (seen.insert(passage.id).second) out.push_back(std::move(passage));
    }
  }
  return out;
}

}  // namespace nugget::retrieval
