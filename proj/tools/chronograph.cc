// chronograph: dated people-link corpora to per-year influence networks.
//
//   chronograph ingest  --dump enwiki.xml --annotations ann.jsonl --out corpus.jsonl
//   chronograph build   --corpus corpus.jsonl --out bundle/
//   chronograph report  --bundle bundle/ --kind top --n 10
//   chronograph compare --bundle en/ --bundle zh/ --n 50
//   chronograph serve   --bundle en=bundle/ --port 8080
//
// Exit codes: 0 ok, 1 internal error, 2 usage or input error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "chronograph/api.h"
#include "chronograph/bundle.h"
#include "chronograph/dump.h"
#include "chronograph/errors.h"
#include "chronograph/format.h"
#include "chronograph/pipeline.h"
#include "chronograph/reports.h"

namespace {

using namespace chronograph;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("chronograph");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  if (const char* level = std::getenv("CHRONOGRAPH_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

struct IngestArgs {
  std::string dump;
  std::string corpus;
  std::string annotations;
  std::string edition = "en";
  Year from = -3000;
  Year to = 1950;
  std::string out;
  std::size_t max_page_bytes = 8u << 20;
};

int cmd_ingest(const IngestArgs& a, const CLI::App& sub) {
  if (a.from > a.to) throw InputError("--from " + std::to_string(a.from) + " is after --to " + std::to_string(a.to));
  Annotations annotations;
  if (!a.annotations.empty()) annotations = load_annotations(a.annotations);

  Corpus corpus;
  if (!a.dump.empty()) {
    std::ifstream in(a.dump, std::ios::binary);
    if (!in) throw InputError("cannot open " + a.dump);
    DumpOptions options;
    options.max_page_bytes = a.max_page_bytes;
    DumpStats dump_stats;
    std::vector<RawPage> pages = parse_dump(in, &dump_stats, options);
    ResolveOptions ro;
    ro.edition = a.edition;
    ro.horizon = {a.from, a.to};
    ro.annotations = a.annotations.empty() ? nullptr : &annotations;
    corpus = resolve(pages, ro);
    corpus.stats.oversized_pages = dump_stats.oversized_pages;
    if (dump_stats.oversized_pages > 0) {
      spdlog::warn("skipped {} page(s) larger than {} bytes", dump_stats.oversized_pages, a.max_page_bytes);
    }
  } else {
    corpus = load_corpus(a.corpus);
    if (sub.count("--edition")) corpus.edition = a.edition;
    if (!a.annotations.empty()) annotate(corpus, annotations);
  }
  write_corpus(corpus, a.out);

  const CorpusStats& s = corpus.stats;
  spdlog::info("pages {} | dated persons {} | links {}", s.pages_seen, corpus.persons.size(), corpus.links.size());
  spdlog::info("dropped: redirects {} undated {} invalid-dates {} out-of-horizon {}", s.redirects, s.undated,
               s.invalid_dates, s.out_of_horizon);
  spdlog::info("dropped links: dangling {} self {} duplicate {} (redirect cycles {})", s.dangling_links,
               s.self_links, s.duplicate_links, s.redirect_cycles);
  if (s.multiple_dates > 0) spdlog::warn("{} page(s) carried several birth or death categories", s.multiple_dates);
  return kExitOk;
}

struct BuildArgs {
  std::string corpus;
  std::string out;
  Year from = -3000;
  Year to = 1950;
  double damping = 0.85;
  double eps = 1e-9;
  int max_iter = 100;
  std::size_t top = 50;
  std::string agg = "sum";
  std::string culture;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
};

int cmd_build(const BuildArgs& a) {
  RunConfig config;
  config.range = {a.from, a.to};
  config.pagerank = {a.damping, a.eps, a.max_iter};
  config.k = a.top;
  config.method = *parse_aggregation(a.agg);
  config.culture = a.culture;
  config.workers = a.workers;
  config.validate();

  Corpus corpus = load_corpus(a.corpus);
  spdlog::info("{} persons, {} links, sweeping [{}, {}] on {} worker(s)", corpus.persons.size(),
               corpus.links.size(), a.from, a.to, a.workers);
  RunOutputs run = run_pipeline(corpus, config, [](int done, int total) {
    if (done % 1000 == 0 || done == total) spdlog::info("ranked {}/{} years", done, total);
  });
  Manifest m = write_bundle(run, corpus, a.out);
  spdlog::info("bundle written to {} ({} nonempty years, hash {})", a.out, m.nonempty_year_count,
               m.params_hash.substr(0, 12));
  return kExitOk;
}

int cmd_report(const std::string& dir, const std::string& kind, std::size_t n, bool as_json) {
  auto bundle = Bundle::open(dir);
  const auto& people = bundle->people();
  if (kind == "top") {
    const AllTimeRanking& r = bundle->alltime();
    const std::size_t count = std::min(n, r.entries.size());
    if (as_json) {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t i = 0; i < count; ++i) {
        const auto& e = r.entries[i];
        rows.push_back({{"rank", i + 1}, {"id", e.id}, {"title", people.at(e.id).title}, {"score", e.score},
                        {"indegree", e.indegree}});
      }
      std::cout << rows.dump(2) << "\n";
      return kExitOk;
    }
    std::vector<std::vector<std::string>> rows = {{"rank", "id", "title", "score", "indegree"}};
    for (std::size_t i = 0; i < count; ++i) {
      const auto& e = r.entries[i];
      rows.push_back({std::to_string(i + 1), std::to_string(e.id), people.at(e.id).title, format_double(e.score),
                      std::to_string(e.indegree)});
    }
    std::cout << format_table(rows);
    return kExitOk;
  }
  CategoryReport r = category_distribution(bundle->alltime(), people, n, bundle->manifest().culture);
  if (as_json) {
    std::cout << to_json(r).dump(2) << "\n";
  } else {
    std::cout << (kind == "categories" ? format_categories(r) : format_ingroup(r));
  }
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& identity_path, std::size_t n,
                bool as_json) {
  std::vector<std::shared_ptr<const Bundle>> bundles;
  std::vector<EditionView> views;
  for (const auto& dir : dirs) bundles.push_back(Bundle::open(dir));
  for (const auto& b : bundles) {
    views.push_back({b->manifest().edition, &b->alltime(), b->people(), b->manifest().culture});
  }
  IdentityMap identity;
  if (!identity_path.empty()) identity = IdentityMap::load(identity_path);
  ComparisonReport r = compare_editions(views, identity, n);
  std::cout << (as_json ? to_json(r).dump(2) + "\n" : format_comparison(r));
  return kExitOk;
}

int cmd_serve(const std::vector<std::string>& specs, ServiceConfig config) {
  for (const auto& spec : specs) {
    auto eq = spec.find('=');
    if (eq != std::string::npos) {
      config.bundles[spec.substr(0, eq)] = spec.substr(eq + 1);
    } else {
      config.bundles[Bundle::open(spec)->manifest().edition] = spec;
    }
  }
  ApiService service(std::move(config));
  if (!service.serve()) throw InputError("cannot listen on the requested address");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Per-year historical influence networks from dated people pages"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse a dump or corpus into a validated corpus file");
  auto* dump_opt = ingest_cmd->add_option("--dump", ingest.dump, "MediaWiki XML export")->check(CLI::ExistingFile);
  auto* corpus_opt = ingest_cmd->add_option("--corpus", ingest.corpus, "Existing corpus JSONL")->check(CLI::ExistingFile);
  dump_opt->excludes(corpus_opt);
  ingest_cmd->add_option("--annotations", ingest.annotations, "Occupation/culture sidecar JSONL")
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--edition", ingest.edition, "Language code recorded in the corpus");
  ingest_cmd->add_option("--from", ingest.from, "Horizon start (astronomical year)");
  ingest_cmd->add_option("--to", ingest.to, "Horizon end (astronomical year)");
  ingest_cmd->add_option("--max-page-bytes", ingest.max_page_bytes, "Skip pages with larger text");
  ingest_cmd->add_option("--out", ingest.out, "Output corpus JSONL")->required();

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "Sweep, rank and write a bundle");
  build_cmd->add_option("--corpus", build.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--out", build.out, "Bundle directory (must be empty or absent)")->required();
  build_cmd->add_option("--from", build.from, "First year (astronomical)");
  build_cmd->add_option("--to", build.to, "Last year (astronomical)");
  build_cmd->add_option("--damping", build.damping, "PageRank damping");
  build_cmd->add_option("--eps", build.eps, "L1 convergence threshold");
  build_cmd->add_option("--max-iter", build.max_iter, "PageRank iteration cap");
  build_cmd->add_option("--top", build.top, "Persons kept per year");
  build_cmd->add_option("--agg", build.agg, "All-time aggregation")->check(CLI::IsMember({"sum", "mean", "max"}));
  build_cmd->add_option("--culture", build.culture, "Ingroup culture tag (default from edition)");
  build_cmd->add_option("--workers", build.workers, "Worker threads");

  std::string report_bundle, report_kind;
  std::size_t report_n = 10;
  bool report_json = false;
  auto* report_cmd = app.add_subcommand("report", "Print a table from a bundle");
  report_cmd->add_option("--bundle", report_bundle, "Bundle directory")->required()->check(CLI::ExistingDirectory);
  report_cmd->add_option("--kind", report_kind, "top, categories or ingroup")
      ->required()
      ->check(CLI::IsMember({"top", "categories", "ingroup"}));
  report_cmd->add_option("--n", report_n, "Top-n size");
  report_cmd->add_flag("--json", report_json, "Emit JSON instead of a table");

  std::vector<std::string> compare_bundles;
  std::string compare_identity;
  std::size_t compare_n = 50;
  bool compare_json = false;
  auto* compare_cmd = app.add_subcommand("compare", "Compare all-time top-n across editions");
  compare_cmd->add_option("--bundle", compare_bundles, "Bundle directory (repeat)")
      ->required()
      ->check(CLI::ExistingDirectory);
  compare_cmd->add_option("--identity", compare_identity, "JSONL of {edition,title,key}")->check(CLI::ExistingFile);
  compare_cmd->add_option("--n", compare_n, "Top-n size");
  compare_cmd->add_flag("--json", compare_json, "Emit JSON instead of a table");

  std::vector<std::string> serve_bundles;
  ServiceConfig serve_config;
  auto* serve_cmd = app.add_subcommand("serve", "Serve bundles over HTTP");
  serve_cmd->add_option("--bundle", serve_bundles, "[edition=]bundle directory (repeat)")->required();
  serve_cmd->add_option("--host", serve_config.host, "Bind address");
  serve_cmd->add_option("--port", serve_config.port, "Port");
  serve_cmd->add_option("--cors", serve_config.cors_origins, "Allowed origin (repeat, * for any)");
  serve_cmd->add_option("--cache", serve_config.cache_years, "Year files held in memory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*ingest_cmd) {
      if (ingest.dump.empty() && ingest.corpus.empty()) throw InputError("one of --dump or --corpus is required");
      return cmd_ingest(ingest, *ingest_cmd);
    }
    if (*build_cmd) return cmd_build(build);
    if (*report_cmd) return cmd_report(report_bundle, report_kind, report_n, report_json);
    if (*compare_cmd) {
      if (compare_bundles.size() < 2) throw InputError("compare needs at least two --bundle directories");
      return cmd_compare(compare_bundles, compare_identity, compare_n, compare_json);
    }
    if (*serve_cmd) return cmd_serve(serve_bundles, std::move(serve_config));
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
