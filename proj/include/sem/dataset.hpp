#pragma once

#include <algorithm>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "sem/common.hpp"
#include "sem/text.hpp"

namespace sem {

struct Example {
  std::vector<std::string> tokens;
  int label = 0;
};

struct LabeledDataset {
  std::vector<Example> examples;
  int num_classes = 0;

  std::size_t size() const { return examples.size(); }
};

// UTF-8 lines `label<TAB>text`; the text is tokenized on load.
inline LabeledDataset load_dataset(const std::string& path,
                                   int num_classes = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file: " + path);
  LabeledDataset ds;
  std::string line;
  std::size_t line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": missing tab between label and text");
    int label = 0;
    try {
      label = std::stoi(line.substr(0, tab));
    } catch (const std::exception&) {
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": bad label '" + line.substr(0, tab) + "'");
    }
    if (label < 0)
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": negative label");
    Example ex;
    ex.label = label;
    ex.tokens = tokenize(std::string_view(line).substr(tab + 1));
    if (ex.tokens.empty())
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": empty text");
    max_label = std::max(max_label, label);
    ds.examples.push_back(std::move(ex));
  }
  if (ds.examples.empty()) throw ParseError(path + ": no examples");
  ds.num_classes = num_classes > 0 ? num_classes : max_label + 1;
  for (const auto& ex : ds.examples)
    if (ex.label >= ds.num_classes)
      throw ParseError(path + ": label " + std::to_string(ex.label) +
                       " outside 0.." + std::to_string(ds.num_classes - 1));
  return ds;
}

inline void save_dataset(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open dataset file for writing: " + path);
  for (const auto& ex : ds.examples)
    out << ex.label << '\t' << join_tokens(ex.tokens) << '\n';
  if (!out) throw IoError("failed writing dataset file: " + path);
}

namespace detail {

// One CSV record, handling quoted fields with "" escapes. AG's News ships as
// `"class","title","description"`.
inline std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace detail

// AG's News style CSV (1-based class, title, description) -> labeled
// dataset with 0-based labels and title+description text.
inline LabeledDataset load_ag_csv(const std::string& path,
                                  int num_classes = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open csv file: " + path);
  LabeledDataset ds;
  std::string line;
  std::size_t line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = detail::split_csv_record(line);
    if (fields.size() < 2)
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": expected at least 2 csv fields");
    int cls = 0;
    try {
      cls = std::stoi(fields[0]);
    } catch (const std::exception&) {
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": bad class index '" + fields[0] + "'");
    }
    if (cls < 1)
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": class index must be >= 1");
    std::string text = fields[1];
    for (std::size_t i = 2; i < fields.size(); ++i) {
      text.push_back(' ');
      text += fields[i];
    }
    Example ex;
    ex.label = cls - 1;
    ex.tokens = tokenize(text);
    if (ex.tokens.empty())
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": empty text");
    max_label = std::max(max_label, ex.label);
    ds.examples.push_back(std::move(ex));
  }
  if (ds.examples.empty()) throw ParseError(path + ": no examples");
  ds.num_classes = num_classes > 0 ? num_classes : max_label + 1;
  return ds;
}

// Seeded stratified subsample, `per_class` examples from each class (fewer
// when a class is short). Output keeps a deterministic order.
inline LabeledDataset subsample_per_class(const LabeledDataset& ds,
                                          std::size_t per_class,
                                          std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.examples.size(); ++i)
    by_class[ds.examples[i].label].push_back(i);
  std::mt19937_64 rng(seed);
  LabeledDataset out;
  out.num_classes = ds.num_classes;
  std::vector<std::size_t> chosen;
  for (auto& ids : by_class) {
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t j = 0; j < std::min(per_class, ids.size()); ++j)
      chosen.push_back(ids[j]);
  }
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t id : chosen) out.examples.push_back(ds.examples[id]);
  return out;
}

}  // namespace sem
