#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "convxai/artifacts.hpp"
#include "convxai/corpus.hpp"
#include "convxai/document.hpp"
#include "convxai/error.hpp"
#include "convxai/generator.hpp"
#include "convxai/http_api.hpp"
#include "convxai/service.hpp"
#include "convxai/synthetic.hpp"

namespace {

using namespace convxai;

// Abstracts separated by blank lines.
std::vector<std::string> read_abstracts(std::istream& in) {
  std::vector<std::string> out;
  std::string line, current;
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      if (!trim(current).empty()) out.push_back(trim(current));
      current.clear();
    } else {
      current += (current.empty() ? "" : " ") + line;
    }
  }
  if (!trim(current).empty()) out.push_back(trim(current));
  return out;
}

int run_train(const std::string& corpus_path, const std::string& artifacts_dir, bool strict,
              const std::string& conference) {
  auto ingest = ingest_corpus(std::filesystem::path(corpus_path), strict);
  for (const auto& d : ingest.diagnostics) std::cerr << corpus_path << ":" << d.line << ": " << d.message << "\n";
  Corpus corpus = conference.empty() ? ingest.corpus : ingest.corpus.filter(conference);
  if (corpus.empty()) {
    std::cerr << "no usable records\n";
    return 1;
  }
  auto bundle = train_artifacts(corpus);
  bundle.save(artifacts_dir);
  std::cout << "trained on " << corpus.size() << " abstracts (" << corpus.sentence_count() << " sentences); "
            << "conferences:";
  for (const auto& name : bundle.conference_names()) std::cout << " " << name;
  std::cout << "\nartifacts written to " << artifacts_dir << "\n";
  return 0;
}

int run_serve(const std::string& artifacts_dir, const std::string& host, int port, const std::string& log_dir,
              std::size_t snapshot_every) {
  const auto bundle = ArtifactBundle::load(artifacts_dir);
  auto generator = HttpTextGenerator::from_environment();
  ServiceConfig config;
  config.log_dir = log_dir;
  config.snapshot_every = snapshot_every;
  ConvXaiService service(bundle, config, generator.get());
  const auto restored = service.recover();
  if (restored) std::cerr << "restored " << restored << " sessions from " << log_dir << "\n";
  return serve_http(service, host, port) ? 0 : 1;
}

int run_score(const std::string& artifacts_dir, const std::string& conference, const std::string& input) {
  const auto bundle = ArtifactBundle::load(artifacts_dir);
  const auto& conf = bundle.conference(conference);
  std::vector<std::string> abstracts;
  if (input.empty() || input == "-") {
    abstracts = read_abstracts(std::cin);
  } else {
    std::ifstream in(input);
    if (!in) throw InvalidInput("cannot read " + input);
    abstracts = read_abstracts(in);
  }
  for (std::size_t i = 0; i < abstracts.size(); ++i) {
    const auto doc = analyze_abstract(abstracts[i], 1, bundle.classifier, conf.style_model, conf.profile, {},
                                      bundle.templates);
    auto report = to_json(doc);
    report["abstract"] = i + 1;
    report["conference"] = conference;
    std::cout << report.dump() << "\n";
  }
  return 0;
}

int run_replay(const std::string& artifacts_dir, const std::string& log_path, bool json_output) {
  const auto bundle = ArtifactBundle::load(artifacts_dir);
  const auto events = read_event_log(log_path);
  const auto replay = replay_events(bundle, events);
  if (json_output) {
    std::cout << nlohmann::json({{"responses", replay.responses},
                                 {"matches", replay.matches},
                                 {"stats", replay.stats.to_json()}})
                     .dump(1)
              << "\n";
  } else {
    std::cout << format_transcript(events, replay);
  }
  if (!replay.all_match()) {
    std::cerr << "replay differs from the log\n";
    return 1;
  }
  return 0;
}

int run_synth(const std::string& out_path, std::size_t abstracts, std::uint64_t seed) {
  SyntheticOptions options;
  options.abstracts_per_conference = abstracts;
  options.seed = seed;
  const auto corpus = synthetic_corpus(options);
  write_corpus(corpus, std::filesystem::path(out_path));
  std::cout << "wrote " << corpus.size() << " abstracts to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conversational writing assistant with explanations"};
  app.require_subcommand(1);

  std::string corpus, artifacts = "artifacts", conference, host = "127.0.0.1", log_dir = "sessions", input,
                      log_path, out = "corpus.jsonl";
  bool strict = false, json_output = false;
  int port = 8080;
  std::size_t snapshot_every = 50, abstracts = 60;
  std::uint64_t seed = 7;

  auto* train = app.add_subcommand("train", "Train artifacts from a labeled corpus");
  train->add_option("--corpus", corpus, "Line-delimited JSON corpus")->required();
  train->add_option("--artifacts-dir", artifacts, "Output directory")->capture_default_str();
  train->add_option("--conference", conference, "Only train on this conference");
  train->add_flag("--strict", strict, "Fail on the first malformed corpus line");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--artifacts-dir", artifacts, "Artifact directory")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port")->capture_default_str();
  serve->add_option("--log-dir", log_dir, "Session event log directory")->capture_default_str();
  serve->add_option("--snapshot-every", snapshot_every, "Events between snapshots (0 disables)")->capture_default_str();

  auto* score = app.add_subcommand("score", "Review abstracts (blank-line separated) and print JSON reports");
  score->add_option("--artifacts-dir", artifacts, "Artifact directory")->capture_default_str();
  score->add_option("--conference", conference, "Target conference")->required();
  score->add_option("--input", input, "Input file, '-' or omitted for stdin");

  auto* replay = app.add_subcommand("replay", "Replay a session log and print its transcript");
  replay->add_option("--artifacts-dir", artifacts, "Artifact directory")->capture_default_str();
  replay->add_option("--log", log_path, "Session .jsonl file")->required();
  replay->add_flag("--json", json_output, "Print replayed responses as JSON");

  auto* synth = app.add_subcommand("synth", "Write a synthetic demo corpus");
  synth->add_option("--out", out, "Output path")->capture_default_str();
  synth->add_option("--abstracts", abstracts, "Abstracts per conference")->capture_default_str();
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(corpus, artifacts, strict, conference);
    if (*serve) return run_serve(artifacts, host, port, log_dir, snapshot_every);
    if (*score) return run_score(artifacts, conference, input);
    if (*replay) return run_replay(artifacts, log_path, json_output);
    if (*synth) return run_synth(out, abstracts, seed);
  } catch (const convxai::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
