#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "convxai/aspect.hpp"
#include "json.hpp"

namespace convxai {

struct LabeledSentence {
  std::string text;
  AspectLabel label = AspectLabel::Other;
};

struct CorpusRecord {
  std::string conference;
  int year = 0;
  std::string abstract_id;
  std::vector<LabeledSentence> sentences;

  std::vector<AspectLabel> labels() const;
};

// An immutable, validated collection of labeled abstracts.
class Corpus {
 public:
  Corpus() = default;
  // Validates every record; throws InvalidInput on the first violation.
  explicit Corpus(std::vector<CorpusRecord> records);

  const std::vector<CorpusRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  std::size_t sentence_count() const;

  // Sorted, de-duplicated conference identifiers.
  std::vector<std::string> conferences() const;
  // The subset of records for one conference, in original order.
  Corpus filter(std::string_view conference) const;

 private:
  std::vector<CorpusRecord> records_;
};

struct IngestDiagnostic {
  std::size_t line = 0;  // 1-based; 0 for file-level notes
  std::string message;
};

struct IngestResult {
  Corpus corpus;
  std::vector<IngestDiagnostic> diagnostics;
};

// Parses one corpus line. Throws InvalidInput describing the first problem.
CorpusRecord parse_record(const nlohmann::json& object);
nlohmann::json to_json(const CorpusRecord& record);

// Reads line-delimited records. In strict mode the first bad line throws
// InvalidInput (message carries the line number); otherwise bad lines are
// skipped and reported in `diagnostics`.
IngestResult ingest_corpus(std::istream& in, bool strict = false);
IngestResult ingest_corpus(const std::filesystem::path& path, bool strict = false);

void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace convxai
