// Corpora whose all-time top-50 carries a chosen mix of occupation and
// culture tags, one per edition column of the category table.
#ifndef CHRONOGRAPH_TESTS_COLUMNS_H_
#define CHRONOGRAPH_TESTS_COLUMNS_H_

#include <algorithm>
#include <cstdio>
#include <string>

#include "chronograph/corpus.h"

namespace chronograph::testing {

struct CategoryColumn {
  std::string edition;
  std::string culture;
  int politician;
  int religious;
  int artist_scientist;
  int ingroup;
};

inline const CategoryColumn kEnglishColumn{"en", "anglo", 26, 11, 13, 10};
inline const CategoryColumn kChineseColumn{"zh", "sinic", 46, 1, 3, 48};
inline const CategoryColumn kJapaneseColumn{"ja", "japonic", 47, 0, 3, 31};

// 50 leaders alive over [0, 100] and 20 minor figures alive over [0, 10].
// Minor figures are ingroup politicians, so any of them leaking into the
// top-50 would show up in the counts.
inline Corpus column_corpus(const CategoryColumn& col) {
  Corpus c;
  c.edition = col.edition;
  char buf[32];
  for (int i = 0; i < 50; ++i) {
    std::snprintf(buf, sizeof buf, "Leader %02d", i);
    Person p{i, buf, 0, 100};
    if (i < col.politician) {
      p.occupation = Occupation::kPolitician;
    } else if (i < col.politician + col.religious) {
      p.occupation = Occupation::kReligious;
    } else if (i < col.politician + col.religious + col.artist_scientist) {
      p.occupation = Occupation::kArtistScientist;
    }
    // Ingroup members are spread from the end so they cut across occupations.
    p.culture = i >= 50 - col.ingroup ? col.culture : "foreign";
    c.persons.push_back(p);
  }
  for (int i = 0; i < 20; ++i) {
    std::snprintf(buf, sizeof buf, "Minor %02d", i);
    Person p{50 + i, buf, 0, 10, Occupation::kPolitician, col.culture};
    c.persons.push_back(p);
  }
  for (int i = 0; i < 50; ++i) {
    c.links.emplace_back(i, (i + 1) % 50);
    c.links.emplace_back(i, (i + 2) % 50);
  }
  for (int i = 0; i < 20; ++i) c.links.emplace_back(50 + i, 50 + (i + 1) % 20);
  std::sort(c.links.begin(), c.links.end());
  return c;
}

}  // namespace chronograph::testing

#endif  // CHRONOGRAPH_TESTS_COLUMNS_H_
