#include "convxai/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "convxai/error.hpp"
#include "convxai/text.hpp"

namespace convxai {

std::vector<AspectLabel> CorpusRecord::labels() const {
  std::vector<AspectLabel> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.label);
  return out;
}

namespace {

void validate(const CorpusRecord& record) {
  if (record.conference.empty()) throw InvalidInput("record has an empty conference");
  if (record.abstract_id.empty()) throw InvalidInput("record has an empty abstract_id");
  if (record.sentences.empty()) {
    throw InvalidInput("abstract '" + record.abstract_id + "' has no sentences");
  }
  for (std::size_t i = 0; i < record.sentences.size(); ++i) {
    if (trim(record.sentences[i].text).empty()) {
      throw InvalidInput("abstract '" + record.abstract_id + "' sentence " +
                         std::to_string(i) + " is blank");
    }
  }
}

}  // namespace

Corpus::Corpus(std::vector<CorpusRecord> records) : records_(std::move(records)) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& record : records_) {
    validate(record);
    if (!seen.emplace(record.conference, record.abstract_id).second) {
      throw InvalidInput("duplicate abstract '" + record.abstract_id + "' in conference '" +
                         record.conference + "'");
    }
  }
}

std::size_t Corpus::sentence_count() const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.sentences.size();
  return n;
}

std::vector<std::string> Corpus::conferences() const {
  std::set<std::string> names;
  for (const auto& r : records_) names.insert(r.conference);
  return {names.begin(), names.end()};
}

Corpus Corpus::filter(std::string_view conference) const {
  Corpus out;
  for (const auto& r : records_) {
    if (r.conference == conference) out.records_.push_back(r);
  }
  return out;
}

CorpusRecord parse_record(const nlohmann::json& object) {
  if (!object.is_object()) throw InvalidInput("record is not an object");
  auto require = [&](const char* key) -> const nlohmann::json& {
    auto it = object.find(key);
    if (it == object.end()) throw InvalidInput(std::string("missing field '") + key + "'");
    return *it;
  };
  CorpusRecord record;
  const auto& conference = require("conference");
  const auto& year = require("year");
  const auto& id = require("abstract_id");
  const auto& sentences = require("sentences");
  if (!conference.is_string()) throw InvalidInput("'conference' must be a string");
  if (!year.is_number_integer()) throw InvalidInput("'year' must be an integer");
  if (!id.is_string()) throw InvalidInput("'abstract_id' must be a string");
  if (!sentences.is_array()) throw InvalidInput("'sentences' must be an array");
  record.conference = conference.get<std::string>();
  record.year = year.get<int>();
  record.abstract_id = id.get<std::string>();
  for (const auto& s : sentences) {
    if (!s.is_object() || !s.contains("text") || !s.contains("label") ||
        !s["text"].is_string() || !s["label"].is_string()) {
      throw InvalidInput("sentence entries need string 'text' and 'label'");
    }
    const auto label_text = s["label"].get<std::string>();
    auto label = parse_aspect(label_text);
    if (!label) throw InvalidInput("unknown label '" + label_text + "'");
    record.sentences.push_back({s["text"].get<std::string>(), *label});
  }
  validate(record);
  return record;
}

nlohmann::json to_json(const CorpusRecord& record) {
  nlohmann::json sentences = nlohmann::json::array();
  for (const auto& s : record.sentences) {
    sentences.push_back({{"text", s.text}, {"label", std::string(to_string(s.label))}});
  }
  return {{"conference", record.conference},
          {"year", record.year},
          {"abstract_id", record.abstract_id},
          {"sentences", std::move(sentences)}};
}

IngestResult ingest_corpus(std::istream& in, bool strict) {
  IngestResult result;
  std::vector<CorpusRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  auto reject = [&](const std::string& message) {
    if (strict) throw InvalidInput("line " + std::to_string(line_no) + ": " + message);
    result.diagnostics.push_back({line_no, message});
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json object;
    try {
      object = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      reject(std::string("malformed JSON: ") + e.what());
      continue;
    }
    try {
      auto record = parse_record(object);
      if (!seen.emplace(record.conference, record.abstract_id).second) {
        reject("duplicate abstract '" + record.abstract_id + "'");
        continue;
      }
      records.push_back(std::move(record));
    } catch (const InvalidInput& e) {
      reject(e.what());
    }
  }
  if (records.empty()) result.diagnostics.push_back({0, "corpus is empty"});
  result.corpus = Corpus(std::move(records));
  return result;
}

IngestResult ingest_corpus(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read corpus file '" + path.string() + "'");
  return ingest_corpus(in, strict);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& record : corpus.records()) out << to_json(record).dump() << '\n';
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file '" + path.string() + "'");
  write_corpus(corpus, out);
}

}  // namespace convxai
