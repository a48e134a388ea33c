#include "negbayes/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace negbayes {

namespace {

// Decodes one UTF-8 code point at position i, advancing i. Invalid bytes
// decode as U+FFFD and advance by one so tokenization never stalls.
uint32_t decode_utf8(std::string_view s, size_t& i) {
  const auto byte = [&](size_t p) { return static_cast<unsigned char>(s[p]); };
  unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  uint32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (int j = 1; j < len; ++j) {
    unsigned char b = byte(i + j);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

bool is_separator(uint32_t cp) {
  if (cp < 0x80) {
    bool alnum = (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    return !alnum;
  }
  if (cp == 0xFFFD) return true;
  if (cp == 0x00A0 || (cp >= 0x00A1 && cp <= 0x00BF)) return true;  // Latin-1 punctuation
  if (cp == 0x1680) return true;                                    // ogham space
  if (cp >= 0x2000 && cp <= 0x206F) return true;                    // general punctuation + spaces
  if (cp >= 0x3000 && cp <= 0x303F) return true;                    // CJK punctuation
  if (cp >= 0xFE50 && cp <= 0xFE6F) return true;                    // small form variants
  if (cp >= 0xFF01 && cp <= 0xFF0F) return true;                    // fullwidth punctuation
  if (cp >= 0xFF1A && cp <= 0xFF20) return true;
  if (cp >= 0xFF3B && cp <= 0xFF40) return true;
  if (cp >= 0xFF5B && cp <= 0xFF65) return true;
  return false;
}

void append_codepoint(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  size_t cp_count = 0;
  bool all_digits = true;

  auto flush = [&] {
    if (cp_count >= 2 && !all_digits) tokens.push_back(current);
    current.clear();
    cp_count = 0;
    all_digits = true;
  };

  size_t i = 0;
  while (i < text.size()) {
    uint32_t cp = decode_utf8(text, i);
    if (is_separator(cp)) {
      flush();
      continue;
    }
    if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';  // ASCII lowercasing only
    if (cp < '0' || cp > '9') all_digits = false;
    append_codepoint(current, cp);
    ++cp_count;
  }
  flush();
  return tokens;
}

Vocabulary Vocabulary::from_terms(std::vector<std::string> sorted_terms) {
  Vocabulary vocab;
  vocab.terms = std::move(sorted_terms);
  vocab.index.reserve(vocab.terms.size());
  for (uint32_t i = 0; i < vocab.terms.size(); ++i) vocab.index.emplace(vocab.terms[i], i);
  return vocab;
}

Vocabulary build_vocabulary(const std::vector<RawDocument>& docs, size_t min_count) {
  if (min_count < 1) throw std::invalid_argument("build_vocabulary: min_count must be >= 1");
  std::map<std::string, size_t> freq;
  for (const auto& doc : docs) {
    for (auto& tok : tokenize(doc.text)) freq[std::move(tok)] += 1;
  }
  std::vector<std::string> terms;
  for (const auto& [term, count] : freq) {
    if (count >= min_count) terms.push_back(term);
  }
  if (terms.empty()) {
    throw std::runtime_error("build_vocabulary: no term reaches min_count " + std::to_string(min_count));
  }
  // std::map iteration is already lexicographic
  return Vocabulary::from_terms(std::move(terms));
}

DocVector vectorize(const RawDocument& doc, const Vocabulary& vocab) {
  if (vocab.size() == 0) throw std::invalid_argument("vectorize: empty vocabulary");
  std::map<uint32_t, uint32_t> counts;
  for (const auto& tok : tokenize(doc.text)) {
    if (auto idx = vocab.lookup(tok)) counts[*idx] += 1;
  }
  if (counts.empty()) {
    throw std::runtime_error("vectorize: document '" + doc.doc_id + "' has no in-vocabulary token");
  }
  DocVector out;
  out.doc_id = doc.doc_id;
  out.counts.assign(counts.begin(), counts.end());
  for (const auto& [idx, c] : out.counts) out.length += c;
  return out;
}

namespace {

std::vector<RawDocument> load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_corpus: cannot open " + path);
  std::vector<RawDocument> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
    }
    if (!obj.contains("id") || !obj["id"].is_string() || !obj.contains("text") || !obj["text"].is_string()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": record must have string fields \"id\" and \"text\"");
    }
    RawDocument doc;
    doc.doc_id = obj["id"].get<std::string>();
    doc.text = obj["text"].get<std::string>();
    if (obj.contains("class") && !obj["class"].is_null()) {
      if (!obj["class"].is_string()) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": \"class\" must be a string");
      }
      doc.source_class = obj["class"].get<std::string>();
    }
    if (!seen.insert(doc.doc_id).second) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": duplicate doc id '" + doc.doc_id + "'");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<RawDocument> load_labeled_dirs(const std::string& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw std::runtime_error("load_corpus: not a directory: " + root);

  std::vector<std::string> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
  }
  std::sort(class_dirs.begin(), class_dirs.end());

  std::vector<RawDocument> docs;
  for (const auto& cls : class_dirs) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(fs::path(root) / cls)) {
      if (entry.is_regular_file()) files.push_back(entry.path().filename().string());
    }
    std::sort(files.begin(), files.end());
    for (const auto& fname : files) {
      fs::path fpath = fs::path(root) / cls / fname;
      std::ifstream in(fpath, std::ios::binary);
      if (!in) throw std::runtime_error("load_corpus: cannot read " + fpath.string());
      std::ostringstream body;
      body << in.rdbuf();
      RawDocument doc;
      doc.doc_id = cls + "/" + fname;
      doc.text = body.str();
      doc.source_class = cls;
      docs.push_back(std::move(doc));
    }
  }
  return docs;
}

}  // namespace

std::vector<RawDocument> load_corpus(const std::string& path, CorpusFormat format) {
  switch (format) {
    case CorpusFormat::Jsonl:
      return load_jsonl(path);
    case CorpusFormat::LabeledDirs:
      return load_labeled_dirs(path);
  }
  throw std::invalid_argument("load_corpus: unknown format");
}

}  // namespace negbayes
