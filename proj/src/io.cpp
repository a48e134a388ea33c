#include "negbayes/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace negbayes {

using nlohmann::json;

std::string format_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("format_double: value is not finite");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

uint64_t vocab_hash(const Vocabulary& vocab) {
  uint64_t h = 14695981039346656037ULL;  // FNV-1a 64
  auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 1099511628211ULL;
  };
  for (const auto& term : vocab.terms) {
    for (char c : term) mix(static_cast<unsigned char>(c));
    mix('\n');
  }
  return h;
}

std::string vocab_hash_hex(const Vocabulary& vocab) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, vocab_hash(vocab));
  return buf;
}

namespace {

std::string escape(const std::string& s) { return json(s).dump(); }

std::string string_array(const std::vector<std::string>& items) {
  std::string out = "[";
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += escape(items[i]);
  }
  out += "]";
  return out;
}

std::string double_array(std::span<const double> values) {
  std::string out = "[";
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_double(values[i]);
  }
  out += "]";
  return out;
}

std::string counts_object(const DocVector& doc) {
  std::string out = "{";
  for (size_t i = 0; i < doc.counts.size(); ++i) {
    if (i) out += ",";
    out += "\"" + std::to_string(doc.counts[i].first) + "\":" + std::to_string(doc.counts[i].second);
  }
  out += "}";
  return out;
}

std::string bit_array(const std::vector<uint8_t>& bits) {
  std::string out = "[";
  for (size_t i = 0; i < bits.size(); ++i) {
    if (i) out += ",";
    out += bits[i] ? "1" : "0";
  }
  out += "]";
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(where + ": invalid JSON: " + e.what());
  }
}

// Reads entries of a counts object {"<index>":count,...} into a DocVector,
// sorted by numeric index.
DocVector counts_to_doc(const json& counts, std::string doc_id, const std::string& where) {
  DocVector doc;
  doc.doc_id = std::move(doc_id);
  for (const auto& [key, value] : counts.items()) {
    size_t pos = 0;
    unsigned long idx;
    try {
      idx = std::stoul(key, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error(where + ": bad term index '" + key + "'");
    }
    if (pos != key.size()) throw std::runtime_error(where + ": bad term index '" + key + "'");
    if (!value.is_number_integer() || value.get<int64_t>() <= 0) {
      throw std::runtime_error(where + ": count for term " + key + " must be a positive integer");
    }
    doc.counts.emplace_back(static_cast<uint32_t>(idx), static_cast<uint32_t>(value.get<int64_t>()));
  }
  std::sort(doc.counts.begin(), doc.counts.end());
  for (size_t i = 1; i < doc.counts.size(); ++i) {
    if (doc.counts[i].first == doc.counts[i - 1].first) {
      throw std::runtime_error(where + ": duplicate term index " + std::to_string(doc.counts[i].first));
    }
  }
  for (const auto& [j, c] : doc.counts) doc.length += c;
  if (doc.length == 0) throw std::runtime_error(where + ": document has no counts");
  return doc;
}

std::vector<uint8_t> read_bits(const json& arr, int k, const char* field, const std::string& where) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != k) {
    throw std::runtime_error(where + ": \"" + field + "\" must be a length-" + std::to_string(k) + " array");
  }
  std::vector<uint8_t> bits(k);
  for (int i = 0; i < k; ++i) {
    if (!arr[i].is_number_integer() || (arr[i].get<int>() != 0 && arr[i].get<int>() != 1)) {
      throw std::runtime_error(where + ": \"" + field + "\" entries must be 0 or 1");
    }
    bits[i] = static_cast<uint8_t>(arr[i].get<int>());
  }
  return bits;
}

}  // namespace

// ---- model file --------------------------------------------------------------

void save_model(const ModelFile& model, const std::string& path) {
  const ClassParams& p = model.params;
  if (p.k != model.classes.k() || p.v != static_cast<int>(model.vocab.size())) {
    throw std::invalid_argument("save_model: params shape does not match classes/vocab");
  }
  auto out = open_out(path);
  out << "{\n";
  out << "\"classes\":" << string_array(model.classes.names) << ",\n";
  out << "\"vocab\":" << string_array(model.vocab.terms) << ",\n";
  out << "\"estimator\":" << escape(estimator_name(p.estimator)) << ",\n";
  out << "\"t\":" << format_double(p.t) << ",\n";
  out << "\"alpha\":" << format_double(p.alpha) << ",\n";
  out << "\"priors\":" << double_array(p.priors) << ",\n";
  out << "\"theta\":[\n";
  for (int i = 0; i < p.k; ++i) {
    out << double_array(p.theta.row(i)) << (i + 1 < p.k ? ",\n" : "\n");
  }
  out << "]\n}\n";
  finish_out(out, path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json j = parse_json(buf.str(), path);

  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw std::runtime_error(path + ": model is missing \"" + key + "\"");
    return j[key];
  };

  ModelFile model;
  model.classes = ClassSet::of(need("classes").get<std::vector<std::string>>());
  model.vocab = Vocabulary::from_terms(need("vocab").get<std::vector<std::string>>());
  int k = model.classes.k();
  int v = static_cast<int>(model.vocab.size());
  if (v == 0) throw std::runtime_error(path + ": model has an empty vocabulary");

  ClassParams& p = model.params;
  p.k = k;
  p.v = v;
  p.estimator = estimator_from_name(need("estimator").get<std::string>());
  p.t = need("t").get<double>();
  p.alpha = need("alpha").get<double>();
  p.priors = need("priors").get<std::vector<double>>();
  if (static_cast<int>(p.priors.size()) != k) throw std::runtime_error(path + ": priors length != k");

  const json& theta = need("theta");
  if (!theta.is_array() || static_cast<int>(theta.size()) != k) {
    throw std::runtime_error(path + ": theta must have one row per class");
  }
  p.theta = Matrix(k, v);
  for (int i = 0; i < k; ++i) {
    if (!theta[i].is_array() || static_cast<int>(theta[i].size()) != v) {
      throw std::runtime_error(path + ": theta row " + std::to_string(i) + " must have length v");
    }
    double row_sum = 0.0;
    for (int jj = 0; jj < v; ++jj) {
      double val = theta[i][jj].get<double>();
      if (val < 0.0) throw std::runtime_error(path + ": negative theta entry in row " + std::to_string(i));
      p.theta(i, jj) = val;
      row_sum += val;
    }
    if (std::abs(row_sum - 1.0) > 1e-9) {
      throw std::runtime_error(path + ": theta row " + std::to_string(i) + " does not sum to 1");
    }
  }
  return model;
}

// ---- corpus bundle -----------------------------------------------------------

void save_bundle(const CorpusBundle& bundle, const std::string& path) {
  if (bundle.docs.size() != bundle.labels.size()) {
    throw std::invalid_argument("save_bundle: docs and labels differ in length");
  }
  auto out = open_out(path);
  out << "{\"classes\":" << string_array(bundle.class_names)
      << ",\"vocab\":" << string_array(bundle.vocab.terms) << "}\n";
  for (size_t d = 0; d < bundle.docs.size(); ++d) {
    out << "{\"id\":" << escape(bundle.docs[d].doc_id) << ",\"counts\":" << counts_object(bundle.docs[d]);
    int label = bundle.labels[d];
    if (label >= 0) {
      if (label >= static_cast<int>(bundle.class_names.size())) {
        throw std::invalid_argument("save_bundle: label out of range for doc '" + bundle.docs[d].doc_id + "'");
      }
      out << ",\"class\":" << escape(bundle.class_names[label]);
    }
    out << "}\n";
  }
  finish_out(out, path);
}

CorpusBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open bundle " + path);
  std::string line;
  size_t lineno = 0;

  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty bundle (missing header)");
  ++lineno;
  json header = parse_json(line, path + ":1");
  if (!header.contains("vocab") || !header["vocab"].is_array()) {
    throw std::runtime_error(path + ":1: bundle header must carry \"vocab\"");
  }
  CorpusBundle bundle;
  bundle.vocab = Vocabulary::from_terms(header["vocab"].get<std::vector<std::string>>());
  if (header.contains("classes")) bundle.class_names = header["classes"].get<std::vector<std::string>>();

  std::unordered_map<std::string, int> class_index;
  for (size_t i = 0; i < bundle.class_names.size(); ++i) {
    class_index.emplace(bundle.class_names[i], static_cast<int>(i));
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string where = path + ":" + std::to_string(lineno);
    json rec = parse_json(line, where);
    if (!rec.contains("id") || !rec["id"].is_string() || !rec.contains("counts") || !rec["counts"].is_object()) {
      throw std::runtime_error(where + ": record must have \"id\" and \"counts\"");
    }
    DocVector doc = counts_to_doc(rec["counts"], rec["id"].get<std::string>(), where);
    for (const auto& [j, c] : doc.counts) {
      if (j >= bundle.vocab.size()) {
        throw std::runtime_error(where + ": term index " + std::to_string(j) + " exceeds vocabulary");
      }
    }
    int label = -1;
    if (rec.contains("class") && !rec["class"].is_null()) {
      auto it = class_index.find(rec["class"].get<std::string>());
      if (it == class_index.end()) {
        throw std::runtime_error(where + ": class '" + rec["class"].get<std::string>() +
                                 "' not in bundle header");
      }
      label = it->second;
    }
    bundle.docs.push_back(std::move(doc));
    bundle.labels.push_back(label);
  }
  return bundle;
}

// ---- partial-label dataset ----------------------------------------------------

void save_partial_dataset(const PartialDataset& ds, const Vocabulary& vocab,
                          const std::string& path) {
  if (ds.s1_size + ds.s2_size != ds.records.size()) {
    throw std::invalid_argument("save_partial_dataset: block sizes do not cover records");
  }
  auto out = open_out(path);
  out << "{\"classes\":" << string_array(ds.classes.names) << ",\"vocab\":" << string_array(vocab.terms)
      << "}\n";
  int k = ds.classes.k();
  for (const auto& rec : ds.records) {
    validate_record(rec, k, "save_partial_dataset");
    out << "{\"id\":" << escape(rec.doc.doc_id) << ",\"counts\":" << counts_object(rec.doc)
        << ",\"y\":" << bit_array(rec.y) << ",\"z\":" << bit_array(rec.z) << ",\"origin\":"
        << (rec.origin == RecordOrigin::S1 ? "\"S1\"" : "\"S2\"") << "}\n";
  }
  finish_out(out, path);
}

LoadedDataset load_partial_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset " + path);
  std::string line;
  size_t lineno = 0;

  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty dataset (missing header)");
  ++lineno;
  json header = parse_json(line, path + ":1");
  if (!header.contains("classes") || !header["classes"].is_array()) {
    throw std::runtime_error(path + ":1: dataset header must carry \"classes\"");
  }

  LoadedDataset loaded;
  loaded.dataset.classes = ClassSet::of(header["classes"].get<std::vector<std::string>>());
  int k = loaded.dataset.classes.k();
  if (header.contains("vocab")) {
    loaded.vocab = Vocabulary::from_terms(header["vocab"].get<std::vector<std::string>>());
  }

  std::vector<LabeledRecord> s1, s2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string where = path + ":" + std::to_string(lineno);
    json rec_json = parse_json(line, where);
    if (!rec_json.contains("id") || !rec_json["id"].is_string()) {
      throw std::runtime_error(where + ": record must have a string \"id\"");
    }
    std::string id = rec_json["id"].get<std::string>();

    LabeledRecord rec;
    if (rec_json.contains("counts") && rec_json["counts"].is_object()) {
      rec.doc = counts_to_doc(rec_json["counts"], id, where);
      if (loaded.vocab) {
        for (const auto& [j, c] : rec.doc.counts) {
          if (j >= loaded.vocab->size()) {
            throw std::runtime_error(where + ": term index " + std::to_string(j) + " exceeds vocabulary");
          }
        }
      }
    } else if (rec_json.contains("text") && rec_json["text"].is_string()) {
      if (!loaded.vocab) {
        throw std::runtime_error(where + ": \"text\" record needs a \"vocab\" entry in the header");
      }
      RawDocument raw{id, rec_json["text"].get<std::string>(), std::nullopt};
      try {
        rec.doc = vectorize(raw, *loaded.vocab);
      } catch (const std::exception& e) {
        throw std::runtime_error(where + ": " + e.what());
      }
    } else {
      throw std::runtime_error(where + ": record must have \"counts\" or \"text\"");
    }

    if (!rec_json.contains("origin") || !rec_json["origin"].is_string()) {
      throw std::runtime_error(where + ": record must have \"origin\" \"S1\" or \"S2\"");
    }
    std::string origin = rec_json["origin"].get<std::string>();
    if (origin == "S1") {
      rec.origin = RecordOrigin::S1;
    } else if (origin == "S2") {
      rec.origin = RecordOrigin::S2;
    } else {
      throw std::runtime_error(where + ": origin must be \"S1\" or \"S2\", got '" + origin + "'");
    }
    if (!rec_json.contains("y") || !rec_json.contains("z")) {
      throw std::runtime_error(where + ": record must have \"y\" and \"z\"");
    }
    rec.y = read_bits(rec_json["y"], k, "y", where);
    rec.z = read_bits(rec_json["z"], k, "z", where);
    validate_record(rec, k, where);

    (rec.origin == RecordOrigin::S1 ? s1 : s2).push_back(std::move(rec));
  }

  PartialDataset& ds = loaded.dataset;
  ds.s1_size = s1.size();
  ds.s2_size = s2.size();
  ds.records = std::move(s1);
  ds.records.insert(ds.records.end(), std::make_move_iterator(s2.begin()),
                    std::make_move_iterator(s2.end()));
  return loaded;
}

// ---- predictions / evaluation ------------------------------------------------

void save_predictions(const std::vector<Prediction>& preds, const ClassSet& classes,
                      const std::string& path) {
  auto out = open_out(path);
  int k = classes.k();
  for (const auto& pred : preds) {
    if (pred.predicted < 0 || pred.predicted >= k) {
      throw std::invalid_argument("save_predictions: predicted class out of range");
    }
    out << "{\"id\":" << escape(pred.doc_id) << ",\"true\":";
    if (pred.true_class && *pred.true_class >= 0 && *pred.true_class < k) {
      out << escape(classes.names[*pred.true_class]);
    } else {
      out << "null";
    }
    out << ",\"pred\":" << escape(classes.names[pred.predicted]) << ",\"scores\":" << double_array(pred.scores)
        << "}\n";
  }
  finish_out(out, path);
}

void save_eval_report_json(const EvalReport& report, const ClassSet& classes,
                           const std::string& path) {
  int k = classes.k();
  if (static_cast<int>(report.per_class_accuracy.size()) != k) {
    throw std::invalid_argument("save_eval_report_json: report does not match class set");
  }
  auto out = open_out(path);
  out << "{\n\"n_test\":" << report.n_test << ",\n\"macro_accuracy\":" << format_double(report.macro_accuracy)
      << ",\n\"micro_accuracy\":" << format_double(report.micro_accuracy) << ",\n\"per_class\":[\n";
  for (int i = 0; i < k; ++i) {
    int64_t row_total = 0;
    for (int j = 0; j < k; ++j) row_total += report.confusion[i][j];
    out << "{\"class\":" << escape(classes.names[i]) << ",\"n\":" << row_total
        << ",\"correct\":" << report.confusion[i][i] << ",\"accuracy\":";
    if (std::isnan(report.per_class_accuracy[i])) {
      out << "null";
    } else {
      out << format_double(report.per_class_accuracy[i]);
    }
    out << "}" << (i + 1 < k ? ",\n" : "\n");
  }
  out << "],\n\"confusion\":[\n";
  for (int i = 0; i < k; ++i) {
    out << "[";
    for (int j = 0; j < k; ++j) out << report.confusion[i][j] << (j + 1 < k ? "," : "");
    out << "]" << (i + 1 < k ? ",\n" : "\n");
  }
  out << "]\n}\n";
  finish_out(out, path);
}

void save_eval_report_csv(const EvalReport& report, const ClassSet& classes,
                          const std::string& path) {
  int k = classes.k();
  if (static_cast<int>(report.per_class_accuracy.size()) != k) {
    throw std::invalid_argument("save_eval_report_csv: report does not match class set");
  }
  auto out = open_out(path);
  out << "class,n,correct,accuracy\n";
  int64_t correct_total = 0;
  for (int i = 0; i < k; ++i) {
    int64_t row_total = 0;
    for (int j = 0; j < k; ++j) row_total += report.confusion[i][j];
    correct_total += report.confusion[i][i];
    out << classes.names[i] << "," << row_total << "," << report.confusion[i][i] << ",";
    if (!std::isnan(report.per_class_accuracy[i])) out << format_double(report.per_class_accuracy[i]);
    out << "\n";
  }
  out << "macro,,," << format_double(report.macro_accuracy) << "\n";
  out << "micro," << report.n_test << "," << correct_total << "," << format_double(report.micro_accuracy)
      << "\n";
  finish_out(out, path);
}

}  // namespace negbayes
