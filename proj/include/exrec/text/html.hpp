#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "exrec/text/html_entities.hpp"

namespace exrec::text {

namespace detail {

inline bool iequals_prefix(std::string_view s, std::size_t pos,
                           std::string_view lower) {
  if (pos + lower.size() > s.size()) return false;
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != lower[i])
      return false;
  return true;
}

// True when s[pos..] opens (`<name`) or closes (`</name`) the element,
// followed by whitespace, '>' or '/'.
inline bool tag_at(std::string_view s, std::size_t pos, std::string_view name,
                   bool closing) {
  std::size_t p = pos + 1;
  if (closing) {
    if (p >= s.size() || s[p] != '/') return false;
    ++p;
  }
  if (!iequals_prefix(s, p, name)) return false;
  p += name.size();
  if (p >= s.size()) return false;
  const char c = s[p];
  return c == '>' || c == '/' || std::isspace(static_cast<unsigned char>(c));
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
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

}  // namespace detail

/// Removes `<code>` and `<pre>` elements together with everything inside
/// them. Nesting of the same element is tracked; an unclosed element swallows
/// the rest of the input.
inline std::string strip_code_blocks(std::string_view html) {
  std::string out;
  out.reserve(html.size());
  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] == '<') {
      std::string_view name;
      if (detail::tag_at(html, i, "code", false))
        name = "code";
      else if (detail::tag_at(html, i, "pre", false))
        name = "pre";
      if (!name.empty()) {
        int depth = 1;
        std::size_t j = i + 1;
        while (j < html.size() && depth > 0) {
          if (html[j] == '<') {
            if (detail::tag_at(html, j, name, true))
              --depth;
            else if (detail::tag_at(html, j, name, false))
              ++depth;
          }
          ++j;
        }
        if (depth > 0) return out + ' ';
        // skip to the end of the closing tag
        while (j < html.size() && html[j - 1] != '>') ++j;
        out += ' ';
        i = j;
        continue;
      }
    }
    out += html[i++];
  }
  return out;
}

/// Drops every remaining tag (and `<!-- -->` comments), keeping inner text.
/// A '<' that never closes is kept as text.
inline std::string strip_tags(std::string_view html) {
  std::string out;
  out.reserve(html.size());
  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] == '<') {
      if (html.substr(i, 4) == "<!--") {
        const auto end = html.find("-->", i + 4);
        if (end == std::string_view::npos) break;
        out += ' ';
        i = end + 3;
        continue;
      }
      const auto end = html.find('>', i + 1);
      if (end != std::string_view::npos) {
        out += ' ';
        i = end + 1;
        continue;
      }
    }
    out += html[i++];
  }
  return out;
}

/// Decodes HTML 4 named references and numeric (`&#NN;`, `&#xHH;`)
/// references. Unknown or malformed references are left as-is.
inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '&') {
      const auto semi = s.find(';', i + 1);
      if (semi != std::string_view::npos && semi - i <= 10) {
        const auto ref = s.substr(i + 1, semi - i - 1);
        if (!ref.empty() && ref[0] == '#') {
          std::uint32_t cp = 0;
          const bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
          const auto digits = ref.substr(hex ? 2 : 1);
          auto [p, ec] = std::from_chars(digits.data(),
                                         digits.data() + digits.size(), cp,
                                         hex ? 16 : 10);
          if (!digits.empty() && ec == std::errc{} &&
              p == digits.data() + digits.size()) {
            detail::append_utf8(out, cp);
            i = semi + 1;
            continue;
          }
        } else {
          const auto& table = detail::kHtmlEntities;
          auto it = std::lower_bound(
              table.begin(), table.end(), ref,
              [](const auto& e, std::string_view v) { return e.first < v; });
          if (it != table.end() && it->first == ref) {
            detail::append_utf8(out, it->second);
            i = semi + 1;
            continue;
          }
        }
      }
    }
    out += s[i++];
  }
  return out;
}

}  // namespace exrec::text
