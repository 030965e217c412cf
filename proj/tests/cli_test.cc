#include <sys/wait.h>

#include <cstdio>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "chronograph/bundle.h"
#include "support/bundles.h"
#include "support/columns.h"

using namespace chronograph;
using namespace chronograph::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

Run run(const std::string& args) {
  static TempDir scratch;
  const fs::path err = scratch / "stderr.txt";
  std::string cmd = std::string(CHRONOGRAPH_CLI) + " " + args + " 2>" + err.string();
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  int status = pclose(pipe);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_file(err);
  return r;
}

std::string fixture(const std::string& name) { return (fs::path(CHRONOGRAPH_FIXTURES) / name).string(); }

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("ingest a dump") {
  TempDir tmp;
  auto r = run("ingest --dump " + fixture("dump20.xml") + " --annotations " + fixture("dump20_annotations.jsonl") +
               " --out " + (tmp / "corpus.jsonl").string());
  CHECK_MESSAGE(r.status == 0, r.err);
  CHECK(read_file(tmp / "corpus.jsonl") == read_file(fixture("dump20_expected.jsonl")));
}

TEST_CASE("ingest records the edition") {
  TempDir tmp;
  auto r = run("ingest --dump " + fixture("dump20.xml") + " --edition zh --out " + (tmp / "c.jsonl").string());
  REQUIRE_MESSAGE(r.status == 0, r.err);
  auto header = nlohmann::json::parse(read_file(tmp / "c.jsonl").substr(0, read_file(tmp / "c.jsonl").find('\n')));
  CHECK(header["edition"] == "zh");
}

TEST_CASE("ingest of a missing file names the path") {
  TempDir tmp;
  auto r = run("ingest --dump /nonexistent/dump.xml --out " + (tmp / "c.jsonl").string());
  CHECK(r.status == 2);
  CHECK(r.err.find("/nonexistent/dump.xml") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp / "c.jsonl"));
}

TEST_CASE("ingest of malformed XML reports an offset") {
  TempDir tmp;
  std::ofstream(tmp / "bad.xml") << "<mediawiki><page><title>X</titel></page></mediawiki>";
  auto r = run("ingest --dump " + (tmp / "bad.xml").string() + " --out " + (tmp / "c.jsonl").string());
  CHECK(r.status == 2);
  CHECK(r.err.find("at byte 33") != std::string::npos);
}

TEST_CASE("build rejects an inverted year range") {
  TempDir tmp;
  run("ingest --dump " + fixture("dump20.xml") + " --out " + (tmp / "c.jsonl").string());
  auto r = run("build --corpus " + (tmp / "c.jsonl").string() + " --from 100 --to 50 --out " +
               (tmp / "b").string());
  CHECK(r.status == 2);
  CHECK(r.err.find("--from 100 is after --to 50") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp / "b" / "manifest.json"));

  auto bad_agg = run("build --corpus " + (tmp / "c.jsonl").string() + " --agg median --out " + (tmp / "b").string());
  CHECK(bad_agg.status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("--help").status == 0);
}

TEST_CASE("build, report and compare") {
  TempDir tmp;
  write_corpus(column_corpus(kEnglishColumn), tmp / "en.jsonl");
  write_corpus(column_corpus(kChineseColumn), tmp / "zh.jsonl");
  for (std::string ed : {"en", "zh"}) {
    auto r = run("build --corpus " + (tmp / (ed + ".jsonl")).string() + " --from 0 --to 100 --out " +
                 (tmp / ed).string());
    REQUIRE_MESSAGE(r.status == 0, r.err);
  }
  const std::string en = (tmp / "en").string(), zh = (tmp / "zh").string();

  auto top = run("report --bundle " + en + " --kind top");
  CHECK(top.status == 0);
  CHECK(count_lines(top.out) == 11);  // header plus ten rows

  auto cats = run("report --bundle " + en + " --kind categories --n 50");
  CHECK(cats.status == 0);
  CHECK(cats.out.find("\nen       50  26          11         13                0      10\n") != std::string::npos);

  auto ingroup = run("report --bundle " + zh + " --kind ingroup --n 50 --json");
  CHECK(ingroup.status == 0);
  CHECK(nlohmann::json::parse(ingroup.out)["outgroup_share"].get<double>() == doctest::Approx(0.04));

  auto bogus = run("report --bundle " + en + " --kind bogus");
  CHECK(bogus.status == 2);

  // Both fixtures use the same leader titles, so en and zh share all 50.
  auto same = run("compare --bundle " + en + " --bundle " + zh + " --n 50 --json");
  REQUIRE(same.status == 0);
  CHECK(nlohmann::json::parse(same.out)["overlap"] == 50);

  write_corpus(roman_corpus(), tmp / "roman.jsonl");
  REQUIRE(run("build --corpus " + (tmp / "roman.jsonl").string() + " --out " + (tmp / "roman").string()).status == 0);
  auto disjoint = run("compare --bundle " + en + " --bundle " + (tmp / "roman").string() + " --json");
  REQUIRE(disjoint.status == 0);
  CHECK(nlohmann::json::parse(disjoint.out)["overlap"] == 0);

  auto one = run("compare --bundle " + en);
  CHECK(one.status == 2);
}

TEST_CASE("build output is deterministic") {
  TempDir tmp;
  write_corpus(column_corpus(kJapaneseColumn), tmp / "ja.jsonl");
  const std::string corpus = (tmp / "ja.jsonl").string();
  REQUIRE(run("build --corpus " + corpus + " --out " + (tmp / "a").string()).status == 0);
  REQUIRE(run("build --corpus " + corpus + " --workers 3 --out " + (tmp / "b").string()).status == 0);
  CHECK(snapshot(tmp / "a") == snapshot(tmp / "b"));
  auto again = run("build --corpus " + corpus + " --out " + (tmp / "a").string());
  CHECK(again.status == 2);
  CHECK(again.err.find("non-empty") != std::string::npos);
}
