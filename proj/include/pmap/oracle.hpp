#pragma once
// Slow reference computations used to cross-check the folding machinery.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "pmap/freegrp.hpp"

namespace pmap::oracle {

// All reduced words of length <= max_len obtainable as products of at most
// `max_factors` generators (and inverses), intermediate products capped at
// `cap` letters. This enumerates closed paths in the unfolded bouquet.
inline std::set<Word> products(const std::vector<Word>& gens, int max_factors, int max_len, int cap = 14) {
  std::vector<Word> alphabet;
  for (const auto& g : gens) {
    if (g.is_identity()) continue;
    alphabet.push_back(g);
    alphabet.push_back(g.inverse());
  }
  std::set<Word> seen{Word()};
  std::vector<Word> frontier{Word()};
  for (int k = 0; k < max_factors; ++k) {
    std::vector<Word> next;
    for (const auto& w : frontier)
      for (const auto& g : alphabet) {
        Word v = w * g;
        if (static_cast<int>(v.size()) > cap) continue;
        if (seen.insert(v).second) next.push_back(v);
      }
    frontier = std::move(next);
  }
  std::set<Word> out;
  for (const auto& w : seen)
    if (static_cast<int>(w.size()) <= max_len) out.insert(w);
  return out;
}

inline bool member(const std::vector<Word>& gens, const Word& w, int max_factors = 6, int cap = 14) {
  return products(gens, max_factors, static_cast<int>(w.size()), cap).count(w) > 0;
}

// Every reduced word of length <= len over the given letters.
inline std::vector<Word> all_words(const std::set<int>& letters, int len) {
  std::vector<Word> out{Word()};
  std::vector<Word> frontier{Word()};
  for (int k = 0; k < len; ++k) {
    std::vector<Word> next;
    for (const auto& w : frontier)
      for (int g : letters)
        for (bool inv : {false, true}) {
          if (!w.is_identity() && w.letters().back() == Letter{g, !inv}) continue;
          next.push_back(w * Word::gen(g, inv));
        }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

// Rank over Q of the abelianized generators (fraction-free elimination).
inline int abelian_rank(const std::vector<Word>& gens) {
  std::set<int> letters;
  for (const auto& w : gens)
    for (int g : w.support()) letters.insert(g);
  std::vector<int> col(letters.begin(), letters.end());
  std::vector<std::vector<__int128>> m;
  for (const auto& w : gens) {
    std::vector<__int128> row(col.size(), 0);
    for (const auto& l : w.letters()) {
      auto j = static_cast<std::size_t>(std::lower_bound(col.begin(), col.end(), l.gen) - col.begin());
      row[j] += l.inv ? -1 : 1;
    }
    m.push_back(row);
  }
  int rank = 0;
  std::size_t r0 = 0;
  for (std::size_t c = 0; c < col.size() && r0 < m.size(); ++c) {
    std::size_t piv = r0;
    while (piv < m.size() && m[piv][c] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[r0]);
    for (std::size_t r = r0 + 1; r < m.size(); ++r) {
      if (m[r][c] == 0) continue;
      __int128 a = m[r0][c], b = m[r][c];
      __int128 g = 0;
      for (std::size_t k = 0; k < col.size(); ++k) {
        m[r][k] = m[r][k] * a - m[r0][k] * b;
        __int128 x = m[r][k] < 0 ? -m[r][k] : m[r][k];
        g = std::gcd(static_cast<std::int64_t>(g), static_cast<std::int64_t>(x));
      }
      if (g > 1)
        for (auto& x : m[r]) x /= g;
    }
    ++r0;
    ++rank;
  }
  return rank;
}

// Corank of a free factor H inside the subgraph factor on `letters`, read off
// the abelianization. Valid because free factors abelianize to direct summands.
inline long abelian_cork(const std::set<int>& letters, const std::vector<Word>& h_gens) {
  return static_cast<long>(letters.size()) - abelian_rank(h_gens);
}

}  // namespace pmap::oracle
