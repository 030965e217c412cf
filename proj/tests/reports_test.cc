#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <doctest.h>

#include "chronograph/errors.h"
#include "chronograph/pipeline.h"
#include "chronograph/reports.h"
#include "support/columns.h"

using namespace chronograph;
using namespace chronograph::testing;

namespace {

CategoryReport column_report(const CategoryColumn& col, std::size_t n = 50) {
  Corpus c = column_corpus(col);
  RunConfig config;
  config.range = {0, 100};
  RunOutputs out = run_pipeline(c, config);
  return category_distribution(out.alltime, c.persons, n, col.culture);
}

// Ranking that lists `ids` in order with decreasing scores.
AllTimeRanking ranking_of(std::string edition, const std::vector<PersonId>& ids) {
  AllTimeRanking r;
  r.edition = std::move(edition);
  double score = 1.0;
  for (PersonId id : ids) r.entries.push_back({id, score -= 0.01, 0});
  return r;
}

std::vector<Person> people_named(const std::vector<std::string>& titles) {
  std::vector<Person> people;
  for (std::size_t i = 0; i < titles.size(); ++i) {
    people.push_back({static_cast<PersonId>(i), titles[i], 0, 1});
  }
  return people;
}

// Pearson correlation of positions, computed directly.
double pearson_of_ranks(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<double> x, y;
  std::vector<std::string> common;
  for (const auto& k : a) {
    if (std::find(b.begin(), b.end(), k) != b.end()) common.push_back(k);
  }
  std::vector<std::string> b_common;
  for (const auto& k : b) {
    if (std::find(common.begin(), common.end(), k) != common.end()) b_common.push_back(k);
  }
  for (std::size_t i = 0; i < common.size(); ++i) {
    x.push_back(static_cast<double>(i));
    y.push_back(static_cast<double>(std::find(b_common.begin(), b_common.end(), common[i]) - b_common.begin()));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("English column fixture") {
  auto r = column_report(kEnglishColumn);
  CHECK(r.n == 50);
  CHECK(r.count(Occupation::kPolitician) == 26);
  CHECK(r.count(Occupation::kReligious) == 11);
  CHECK(r.count(Occupation::kArtistScientist) == 13);
  CHECK(r.count(Occupation::kOther) == 0);
  CHECK(r.ingroup_count == 10);
  CHECK(outgroup_share(r) == doctest::Approx(0.80));
}

TEST_CASE("Chinese column fixture") {
  auto r = column_report(kChineseColumn);
  CHECK(r.count(Occupation::kPolitician) == 46);
  CHECK(r.count(Occupation::kReligious) == 1);
  CHECK(r.count(Occupation::kArtistScientist) == 3);
  CHECK(r.ingroup_count == 48);
  CHECK(outgroup_share(r) == doctest::Approx(2.0 / 50));
}

TEST_CASE("Japanese column fixture") {
  auto r = column_report(kJapaneseColumn);
  CHECK(r.count(Occupation::kPolitician) == 47);
  CHECK(r.count(Occupation::kReligious) == 0);
  CHECK(r.count(Occupation::kArtistScientist) == 3);
  CHECK(r.ingroup_count == 31);
  CHECK(outgroup_share(r) == doctest::Approx(0.38));
}

TEST_CASE("counts always sum to n and ingroup stays within it") {
  for (std::size_t n : {1u, 10u, 50u, 70u, 500u}) {
    auto r = column_report(kEnglishColumn, n);
    int sum = 0;
    for (int c : r.counts) sum += c;
    CHECK(sum == static_cast<int>(r.n));
    CHECK(r.ingroup_count >= 0);
    CHECK(r.ingroup_count <= static_cast<int>(r.n));
    CHECK(r.truncated == (n > 70));
    CHECK(r.requested_n == n);
  }
}

TEST_CASE("outgroup share of an empty report is an error") {
  auto r = column_report(kEnglishColumn, 0);
  CHECK(r.n == 0);
  CHECK_THROWS_AS(outgroup_share(r), InputError);
  CHECK(to_json(r)["outgroup_share"].is_null());
}

TEST_CASE("default cultures") {
  CHECK(default_culture("en") == "anglo");
  CHECK(default_culture("zh") == "sinic");
  CHECK(default_culture("ja") == "japonic");
  CHECK(default_culture("de") == "germanic");
  CHECK(default_culture("xx") == "xx");
}

TEST_CASE("comparing an edition with itself") {
  auto people = people_named({"A", "B", "C", "D", "E"});
  auto r = ranking_of("en", {3, 1, 4, 0, 2});
  std::vector<EditionView> views{{"en", &r, people, "anglo"}, {"en2", &r, people, "anglo"}};
  auto cmp = compare_editions(views, {}, 5);
  CHECK(cmp.overlap() == 5);
  REQUIRE(cmp.pairs.size() == 1);
  CHECK(cmp.pairs[0].overlap == 5);
  CHECK(*cmp.pairs[0].spearman == doctest::Approx(1.0));
  CHECK(compare_editions(views, {}, 3).overlap() == 3);
}

TEST_CASE("disjoint editions share nothing") {
  auto pa = people_named({"A", "B", "C"});
  auto pb = people_named({"X", "Y", "Z"});
  auto ra = ranking_of("en", {0, 1, 2});
  auto rb = ranking_of("zh", {2, 1, 0});
  std::vector<EditionView> views{{"en", &ra, pa, "anglo"}, {"zh", &rb, pb, "sinic"}};
  auto cmp = compare_editions(views, {}, 3);
  CHECK(cmp.overlap() == 0);
  CHECK(cmp.pairs[0].overlap == 0);
  CHECK_FALSE(cmp.pairs[0].spearman);
  CHECK(to_json(cmp)["pairs"][0]["spearman"].is_null());
}

TEST_CASE("three editions with identity overrides") {
  // The zh and ja pages use local titles; the identity map ties them to the
  // English keys.
  auto en = people_named({"Confucius", "Laozi", "Mencius", "Napoleon"});
  auto zh = people_named({"Kongzi", "Laozi", "Mengzi", "Qin Shi Huang"});
  auto ja = people_named({"Koshi", "Oda Nobunaga", "Roshi"});
  IdentityMap id;
  id.keys["zh"]["Kongzi"] = "Confucius";
  id.keys["zh"]["Mengzi"] = "Mencius";
  id.keys["ja"]["Koshi"] = "Confucius";
  id.keys["ja"]["Roshi"] = "Laozi";
  auto ren = ranking_of("en", {3, 0, 1, 2});  // Napoleon, Confucius, Laozi, Mencius
  auto rzh = ranking_of("zh", {0, 3, 2, 1});  // Confucius, Qin, Mencius, Laozi
  auto rja = ranking_of("ja", {1, 2, 0});     // Nobunaga, Laozi, Confucius
  std::vector<EditionView> views{{"en", &ren, en, "anglo"}, {"zh", &rzh, zh, "sinic"}, {"ja", &rja, ja, "japonic"}};
  auto cmp = compare_editions(views, id, 4);
  CHECK(cmp.shared == std::vector<std::string>{"Confucius", "Laozi"});
  REQUIRE(cmp.pairs.size() == 3);
  CHECK(cmp.pairs[0].a == "en");
  CHECK(cmp.pairs[0].b == "zh");
  CHECK(cmp.pairs[0].overlap == 3);
  // en orders Confucius, Laozi, Mencius; zh orders Confucius, Mencius, Laozi.
  CHECK(*cmp.pairs[0].spearman == doctest::Approx(0.5));
  CHECK(cmp.pairs[1].overlap == 2);                         // en/ja
  CHECK(*cmp.pairs[1].spearman == doctest::Approx(-1.0));
  CHECK(cmp.pairs[2].overlap == 2);                         // zh/ja
  CHECK(*cmp.pairs[2].spearman == doctest::Approx(-1.0));

  CHECK_THROWS_AS(compare_editions(std::span(views).first(1), id, 4), InputError);
}

TEST_CASE("spearman matches the Pearson correlation of ranks") {
  std::mt19937_64 rng(12);
  std::vector<std::string> pool;
  for (int i = 0; i < 40; ++i) pool.push_back("P" + std::to_string(i));
  for (int t = 0; t < 100; ++t) {
    std::vector<std::string> a = pool, b = pool;
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    a.resize(25);
    b.resize(25);
    auto s = spearman(a, b);
    auto s_rev = spearman(b, a);
    std::size_t common = 0;
    for (const auto& k : a) common += std::count(b.begin(), b.end(), k);
    if (common < 2) {
      CHECK_FALSE(s);
      continue;
    }
    REQUIRE(s);
    CHECK(*s == doctest::Approx(pearson_of_ranks(a, b)).epsilon(1e-12));
    CHECK(*s == doctest::Approx(*s_rev).epsilon(1e-12));
  }
}

TEST_CASE("identity map file") {
  auto path = std::filesystem::temp_directory_path() / "chronograph_identity_test.jsonl";
  std::ofstream(path) << "{\"edition\":\"zh\",\"title\":\"kongzi\",\"key\":\"Confucius\"}\n\n";
  IdentityMap m = IdentityMap::load(path);
  Person p{0, "Kongzi", 0, 1};
  CHECK(m.key_for("zh", p) == "Confucius");
  CHECK(m.key_for("ja", p) == "Kongzi");
  std::ofstream(path) << "{\"edition\":\"zh\"}\n";
  CHECK_THROWS_AS(IdentityMap::load(path), InputError);
  CHECK_THROWS_AS(IdentityMap::load("/nonexistent/identity.jsonl"), InputError);
}

TEST_CASE("text tables") {
  auto r = column_report(kEnglishColumn);
  auto text = format_categories(r);
  CHECK(text.find("politician") != std::string::npos);
  CHECK(text.find("\nen       50  26          11         13                0      10\n") != std::string::npos);
  CHECK(format_ingroup(r).find("0.8") != std::string::npos);
  CHECK(format_table({{"a", "bb"}, {"ccc", "d"}}) == "a    bb\nccc  d\n");
}

TEST_CASE("comparison is symmetric in edition order") {
  auto pa = people_named({"A", "B", "C", "D", "E", "F"});
  auto pb = people_named({"F", "E", "D", "C", "X", "Y"});
  auto ra = ranking_of("en", {0, 1, 2, 3, 4, 5});
  auto rb = ranking_of("de", {4, 0, 1, 3, 2, 5});
  std::vector<EditionView> ab{{"en", &ra, pa, "anglo"}, {"de", &rb, pb, "germanic"}};
  std::vector<EditionView> ba{ab[1], ab[0]};
  auto x = compare_editions(ab, {}, 6), y = compare_editions(ba, {}, 6);
  CHECK(x.shared == y.shared);
  CHECK(x.pairs[0].overlap == y.pairs[0].overlap);
  REQUIRE(x.pairs[0].spearman);
  CHECK(*x.pairs[0].spearman == doctest::Approx(*y.pairs[0].spearman).epsilon(1e-12));
}
