#pragma once

#include <string>
#include <string_view>

namespace exrec::text {

/// Porter suffix-stripping stemmer, following Martin Porter's reference
/// implementation (including its two documented departures: "bli" -> "ble"
/// and the extra "logi" -> "log" rule). Expects lowercase ASCII input.
class PorterStemmer {
 public:
  std::string operator()(std::string_view word) const {
    State s{std::string(word), 0};
    if (s.b.size() <= 2) return s.b;
    step1ab(s);
    if (s.b.size() > 1) {
      step1c(s);
      step2(s);
      step3(s);
      step4(s);
      step5(s);
    }
    return s.b;
  }

 private:
  // `b` is the current word; `j` marks the end of the stem in front of a
  // matched suffix (index of its last character, -1 for an empty stem).
  struct State {
    std::string b;
    int j;
    int k() const { return static_cast<int>(b.size()) - 1; }
  };

  static bool cons(const State& s, int i) {
    switch (s.b[static_cast<std::size_t>(i)]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(s, i - 1);
      default:
        return true;
    }
  }

  // Number of consonant-vowel sequences in b[0..j].
  static int m(const State& s) {
    int n = 0;
    int i = 0;
    while (true) {
      if (i > s.j) return n;
      if (!cons(s, i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i > s.j) return n;
        if (cons(s, i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i > s.j) return n;
        if (!cons(s, i)) break;
        ++i;
      }
      ++i;
    }
  }

  static bool vowel_in_stem(const State& s) {
    for (int i = 0; i <= s.j; ++i)
      if (!cons(s, i)) return true;
    return false;
  }

  static bool double_cons(const State& s, int i) {
    if (i < 1) return false;
    const auto u = static_cast<std::size_t>(i);
    return s.b[u] == s.b[u - 1] && cons(s, i);
  }

  // consonant-vowel-consonant ending at i, where the final consonant is not
  // w, x or y.
  static bool cvc(const State& s, int i) {
    if (i < 2 || !cons(s, i) || cons(s, i - 1) || !cons(s, i - 2)) return false;
    const char ch = s.b[static_cast<std::size_t>(i)];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  static bool ends(State& s, std::string_view suffix) {
    if (suffix.size() > s.b.size()) return false;
    if (std::string_view(s.b).substr(s.b.size() - suffix.size()) != suffix)
      return false;
    s.j = s.k() - static_cast<int>(suffix.size());
    return true;
  }

  static void set_to(State& s, std::string_view replacement) {
    s.b.resize(static_cast<std::size_t>(s.j + 1));
    s.b += replacement;
  }

  static void replace_if_measured(State& s, std::string_view replacement) {
    if (m(s) > 0) set_to(s, replacement);
  }

  static void truncate_to(State& s, int last) {
    s.b.resize(static_cast<std::size_t>(last + 1));
  }

  static void step1ab(State& s) {
    if (s.b.back() == 's') {
      if (ends(s, "sses"))
        truncate_to(s, s.k() - 2);
      else if (ends(s, "ies"))
        set_to(s, "i");
      else if (s.b[s.b.size() - 2] != 's')
        truncate_to(s, s.k() - 1);
    }
    if (ends(s, "eed")) {
      if (m(s) > 0) truncate_to(s, s.k() - 1);
    } else if ((ends(s, "ed") || ends(s, "ing")) && vowel_in_stem(s)) {
      truncate_to(s, s.j);
      if (ends(s, "at"))
        set_to(s, "ate");
      else if (ends(s, "bl"))
        set_to(s, "ble");
      else if (ends(s, "iz"))
        set_to(s, "ize");
      else if (double_cons(s, s.k())) {
        const char ch = s.b[s.b.size() - 2];
        if (ch != 'l' && ch != 's' && ch != 'z') truncate_to(s, s.k() - 1);
      } else {
        s.j = s.k();
        if (m(s) == 1 && cvc(s, s.k())) s.b += 'e';
      }
    }
  }

  static void step1c(State& s) {
    if (ends(s, "y") && vowel_in_stem(s)) s.b.back() = 'i';
  }

  // Tries each (suffix, replacement) pair in order; the first suffix that
  // matches ends the search whether or not the measure condition holds.
  template <std::size_t N>
  static void first_rule(State& s,
                         const std::pair<std::string_view, std::string_view> (
                             &rules)[N]) {
    for (const auto& [suffix, repl] : rules) {
      if (ends(s, suffix)) {
        replace_if_measured(s, repl);
        return;
      }
    }
  }

  static void step2(State& s) {
    using R = std::pair<std::string_view, std::string_view>;
    switch (s.b[s.b.size() - 2]) {
      case 'a': {
        static constexpr R r[] = {{"ational", "ate"}, {"tional", "tion"}};
        first_rule(s, r);
        break;
      }
      case 'c': {
        static constexpr R r[] = {{"enci", "ence"}, {"anci", "ance"}};
        first_rule(s, r);
        break;
      }
      case 'e': {
        static constexpr R r[] = {{"izer", "ize"}};
        first_rule(s, r);
        break;
      }
      case 'l': {
        static constexpr R r[] = {{"bli", "ble"},
                                  {"alli", "al"},
                                  {"entli", "ent"},
                                  {"eli", "e"},
                                  {"ousli", "ous"}};
        first_rule(s, r);
        break;
      }
      case 'o': {
        static constexpr R r[] = {
            {"ization", "ize"}, {"ation", "ate"}, {"ator", "ate"}};
        first_rule(s, r);
        break;
      }
      case 's': {
        static constexpr R r[] = {{"alism", "al"},
                                  {"iveness", "ive"},
                                  {"fulness", "ful"},
                                  {"ousness", "ous"}};
        first_rule(s, r);
        break;
      }
      case 't': {
        static constexpr R r[] = {
            {"aliti", "al"}, {"iviti", "ive"}, {"biliti", "ble"}};
        first_rule(s, r);
        break;
      }
      case 'g': {
        static constexpr R r[] = {{"logi", "log"}};
        first_rule(s, r);
        break;
      }
      default:
        break;
    }
  }

  static void step3(State& s) {
    using R = std::pair<std::string_view, std::string_view>;
    switch (s.b.back()) {
      case 'e': {
        static constexpr R r[] = {
            {"icate", "ic"}, {"ative", ""}, {"alize", "al"}};
        first_rule(s, r);
        break;
      }
      case 'i': {
        static constexpr R r[] = {{"iciti", "ic"}};
        first_rule(s, r);
        break;
      }
      case 'l': {
        static constexpr R r[] = {{"ical", "ic"}, {"ful", ""}};
        first_rule(s, r);
        break;
      }
      case 's': {
        static constexpr R r[] = {{"ness", ""}};
        first_rule(s, r);
        break;
      }
      default:
        break;
    }
  }

  static bool any_suffix(State& s, std::initializer_list<std::string_view> l) {
    for (auto suffix : l)
      if (ends(s, suffix)) return true;
    return false;
  }

  static void step4(State& s) {
    bool matched = false;
    switch (s.b[s.b.size() - 2]) {
      case 'a': matched = any_suffix(s, {"al"}); break;
      case 'c': matched = any_suffix(s, {"ance", "ence"}); break;
      case 'e': matched = any_suffix(s, {"er"}); break;
      case 'i': matched = any_suffix(s, {"ic"}); break;
      case 'l': matched = any_suffix(s, {"able", "ible"}); break;
      case 'n': matched = any_suffix(s, {"ant", "ement", "ment", "ent"}); break;
      case 'o':
        if (ends(s, "ion") && s.j >= 0 &&
            (s.b[static_cast<std::size_t>(s.j)] == 's' ||
             s.b[static_cast<std::size_t>(s.j)] == 't'))
          matched = true;
        else
          matched = ends(s, "ou");
        break;
      case 's': matched = any_suffix(s, {"ism"}); break;
      case 't': matched = any_suffix(s, {"ate", "iti"}); break;
      case 'u': matched = any_suffix(s, {"ous"}); break;
      case 'v': matched = any_suffix(s, {"ive"}); break;
      case 'z': matched = any_suffix(s, {"ize"}); break;
      default: break;
    }
    if (matched && m(s) > 1) truncate_to(s, s.j);
  }

  static void step5(State& s) {
    s.j = s.k();
    if (s.b.back() == 'e') {
      const int a = m(s);
      if (a > 1 || (a == 1 && !cvc(s, s.k() - 1))) truncate_to(s, s.k() - 1);
    }
    if (s.b.back() == 'l' && double_cons(s, s.k()) && m(s) > 1)
      truncate_to(s, s.k() - 1);
  }
};

inline std::string porter_stem(std::string_view word) {
  return PorterStemmer{}(word);
}

}  // namespace exrec::text
