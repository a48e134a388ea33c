#ifndef NEGBAYES_CORPUS_HPP
#define NEGBAYES_CORPUS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace negbayes {

struct RawDocument {
  std::string doc_id;
  std::string text;
  std::optional<std::string> source_class;
};

// Bidirectional term <-> index map. Terms are lexicographically ordered so a
// given corpus always yields the same vocabulary.
struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, uint32_t> index;

  size_t size() const { return terms.size(); }

  std::optional<uint32_t> lookup(std::string_view term) const {
    auto it = index.find(std::string(term));
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  static Vocabulary from_terms(std::vector<std::string> sorted_terms);
};

// Sparse nonnegative term-count vector. Entries are sorted by term index and
// strictly positive; length is the sum of all counts and is always >= 1.
struct DocVector {
  std::string doc_id;
  std::vector<std::pair<uint32_t, uint32_t>> counts;
  uint64_t length = 0;
};

enum class CorpusFormat { Jsonl, LabeledDirs };

// Lowercases and splits on Unicode whitespace/punctuation. Tokens shorter
// than two code points or consisting only of ASCII digits are dropped.
std::vector<std::string> tokenize(std::string_view text);

// Keeps exactly the terms whose total token count across the corpus is at
// least min_count. Throws if the result would be empty.
Vocabulary build_vocabulary(const std::vector<RawDocument>& docs, size_t min_count);

// Counts in-vocabulary tokens; out-of-vocabulary tokens are dropped. Throws
// if no token of the document is in the vocabulary.
DocVector vectorize(const RawDocument& doc, const Vocabulary& vocab);

// jsonl: one object per line, keys "id", "text", optional "class".
// labeled_dirs: <root>/<class_name>/<file>, id = relative path.
// Document order and ids are deterministic for a given input.
std::vector<RawDocument> load_corpus(const std::string& path, CorpusFormat format);

}  // namespace negbayes

#endif  // NEGBAYES_CORPUS_HPP
