#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sem/common.hpp"
#include "sem/dataset.hpp"
#include "sem/embedding.hpp"
#include "sem/encoder.hpp"

namespace sem {

struct TrainingError : Error {
  using Error::Error;
};

inline int argmax_label(const std::vector<double>& conf) {
  int best = 0;
  for (int y = 1; y < static_cast<int>(conf.size()); ++y)
    if (conf[y] > conf[best]) best = y;
  return best;
}

// Black-box classifier surface: per-class softmax confidences and the label
// they imply. Attacks and the harness talk to models only through this.
class TextClassifier {
 public:
  virtual ~TextClassifier() = default;
  virtual std::vector<double> confidences(
      const std::vector<std::string>& tokens) const = 0;
  virtual int num_classes() const = 0;

  double confidence(const std::vector<std::string>& tokens, int label) const {
    return confidences(tokens)[label];
  }
  int predict(const std::vector<std::string>& tokens) const {
    return argmax_label(confidences(tokens));
  }
};

struct TrainConfig {
  int epochs = 40;
  double lr = 0.5;
  double l2 = 1e-4;
  int batch_size = 32;
  std::uint64_t seed = 1;
};

namespace detail {

inline void softmax_inplace(std::vector<double>& z) {
  double zmax = z[0];
  for (double v : z) zmax = std::max(zmax, v);
  double denom = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    denom += v;
  }
  for (double& v : z) v /= denom;
}

}  // namespace detail

// Softmax regression over mean word embeddings. When a preprocessor is set,
// every inference path encodes the tokens first, so words that share a code
// are indistinguishable to the model.
class LinearTextModel : public TextClassifier {
 public:
  LinearTextModel() = default;
  LinearTextModel(std::shared_ptr<const EmbeddingTable> table, int classes,
                  std::optional<SynonymEncoder> preprocessor)
      : table_(std::move(table)),
        classes_(classes),
        preprocessor_(std::move(preprocessor)),
        weights_(static_cast<std::size_t>(classes) * table_->dim, 0.0),
        bias_(classes, 0.0) {}

  // Mean of word vectors. The reserved unknown token contributes a zero
  // vector (it stays in the denominator); other out-of-vocabulary tokens are
  // skipped. No preprocessor is applied here.
  std::vector<double> feature_vector(
      const std::vector<std::string>& tokens) const {
    std::vector<double> mean(table_->dim, 0.0);
    int counted = 0;
    for (const auto& token : tokens) {
      if (token == kUnknownToken) {
        ++counted;
        continue;
      }
      int id = table_->vocab.id_of(token);
      if (id < 0) continue;
      auto row = table_->vector_of(id);
      for (int j = 0; j < table_->dim; ++j) mean[j] += row[j];
      ++counted;
    }
    if (counted > 0)
      for (double& v : mean) v /= counted;
    return mean;
  }

  std::vector<double> confidences(
      const std::vector<std::string>& tokens) const override {
    const std::vector<std::string>* input = &tokens;
    std::vector<std::string> encoded;
    if (preprocessor_) {
      encoded = preprocessor_->encode_text(tokens);
      input = &encoded;
    }
    return confidences_from_feature(feature_vector(*input));
  }

  std::vector<double> confidences_from_feature(
      const std::vector<double>& x) const {
    std::vector<double> z(classes_, 0.0);
    for (int y = 0; y < classes_; ++y) {
      double acc = bias_[y];
      const double* w = weights_.data() +
                        static_cast<std::size_t>(y) * table_->dim;
      for (int j = 0; j < table_->dim; ++j) acc += w[j] * x[j];
      z[y] = acc;
    }
    detail::softmax_inplace(z);
    return z;
  }

  int num_classes() const override { return classes_; }
  int dim() const { return table_->dim; }
  const std::shared_ptr<const EmbeddingTable>& table() const { return table_; }
  const std::optional<SynonymEncoder>& preprocessor() const {
    return preprocessor_;
  }
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }
  const TrainConfig& config() const { return config_; }
  void set_config(const TrainConfig& c) { config_ = c; }

 private:
  std::shared_ptr<const EmbeddingTable> table_;
  int classes_ = 0;
  std::optional<SynonymEncoder> preprocessor_;
  std::vector<double> weights_;
  std::vector<double> bias_;
  TrainConfig config_;
};

// Mini-batch SGD on the cross-entropy loss, deterministic under
// config.seed. Weights start at zero (the objective is convex).
inline LinearTextModel train(const LabeledDataset& dataset,
                             std::shared_ptr<const EmbeddingTable> table,
                             const TrainConfig& config,
                             std::optional<SynonymEncoder> preprocessor =
                                 std::nullopt) {
  if (dataset.examples.empty())
    throw PreconditionError("cannot train on empty dataset");
  std::vector<int> class_counts(dataset.num_classes, 0);
  for (const auto& ex : dataset.examples) ++class_counts[ex.label];
  for (int y = 0; y < dataset.num_classes; ++y)
    if (class_counts[y] == 0)
      throw PreconditionError("class " + std::to_string(y) +
                              " has no training examples");

  LinearTextModel model(std::move(table), dataset.num_classes, preprocessor);
  model.set_config(config);
  const int dim = model.dim();
  const int K = dataset.num_classes;
  const std::size_t n = dataset.examples.size();

  std::vector<std::vector<double>> features;
  features.reserve(n);
  for (const auto& ex : dataset.examples) {
    if (preprocessor)
      features.push_back(
          model.feature_vector(preprocessor->encode_text(ex.tokens)));
    else
      features.push_back(model.feature_vector(ex.tokens));
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<double> grad_w(static_cast<std::size_t>(K) * dim);
  std::vector<double> grad_b(K);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const double inv = 1.0 / static_cast<double>(stop - start);
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t idx = order[i];
        const auto& x = features[idx];
        const int y = dataset.examples[idx].label;
        std::vector<double> p = model.confidences_from_feature(x);
        batch_loss += -std::log(std::max(p[y], 1e-300));
        for (int c = 0; c < K; ++c) {
          const double delta = p[c] - (c == y ? 1.0 : 0.0);
          grad_b[c] += delta;
          double* gw = grad_w.data() + static_cast<std::size_t>(c) * dim;
          for (int j = 0; j < dim; ++j) gw[j] += delta * x[j];
        }
      }
      if (!std::isfinite(batch_loss))
        throw TrainingError("training diverged: non-finite loss");
      double* w = model.weights().data();
      for (int c = 0; c < K; ++c) {
        for (int j = 0; j < dim; ++j) {
          const std::size_t at = static_cast<std::size_t>(c) * dim + j;
          w[at] -= config.lr * (grad_w[at] * inv + config.l2 * w[at]);
        }
        model.bias()[c] -= config.lr * grad_b[c] * inv;
      }
    }
  }
  return model;
}

inline double accuracy(const TextClassifier& model,
                       const LabeledDataset& dataset) {
  if (dataset.examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : dataset.examples)
    if (model.predict(ex.tokens) == ex.label) ++correct;
  return static_cast<double>(correct) / dataset.examples.size();
}

// Trains a plain model, attacks ceil(ratio * n) correctly classified
// training examples, appends the successful adversaries with their original
// labels, and retrains from scratch with the same config. The attack
// callable gets (model, tokens, true_label, seed) and must return a result
// with `success` and `adversarial_tokens`.
template <typename AttackFn>
LinearTextModel adversarial_training(const LabeledDataset& dataset,
                                     std::shared_ptr<const EmbeddingTable> table,
                                     const TrainConfig& config,
                                     AttackFn&& attack, double ratio) {
  if (ratio < 0.0 || ratio > 1.0)
    throw PreconditionError("adversarial ratio must be in [0, 1]");
  LinearTextModel base = train(dataset, table, config);
  if (ratio == 0.0) return base;

  const std::size_t want = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(dataset.examples.size())));
  std::vector<std::size_t> order(dataset.examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(config.seed ^ 0x61647674ull);  // distinct stream
  std::shuffle(order.begin(), order.end(), rng);

  LabeledDataset augmented = dataset;
  std::size_t attacked = 0;
  for (std::size_t idx : order) {
    if (attacked >= want) break;
    const Example& ex = dataset.examples[idx];
    if (base.predict(ex.tokens) != ex.label) continue;
    ++attacked;
    auto result = attack(base, ex.tokens, ex.label,
                         static_cast<std::uint64_t>(idx));
    if (result.success)
      augmented.examples.push_back({result.adversarial_tokens, ex.label});
  }
  return train(augmented, std::move(table), config);
}

inline void save_model(const LinearTextModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  const TrainConfig& c = model.config();
  out << "sem-model v1\n";
  out << "classes " << model.num_classes() << '\n';
  out << "dim " << model.dim() << '\n';
  out << "vocab " << model.table()->vocab.digest() << '\n';
  out << "config " << c.epochs << ' ' << detail::format_double(c.lr) << ' '
      << detail::format_double(c.l2) << ' ' << c.batch_size << ' ' << c.seed
      << '\n';
  char buf[64];
  auto write_row = [&](const double* row, int count) {
    for (int j = 0; j < count; ++j) {
      std::snprintf(buf, sizeof(buf), "%a", row[j]);
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  };
  out << "weights\n";
  for (int y = 0; y < model.num_classes(); ++y)
    write_row(model.weights().data() +
                  static_cast<std::size_t>(y) * model.dim(),
              model.dim());
  out << "bias\n";
  write_row(model.bias().data(), model.num_classes());
  if (model.preprocessor()) {
    out << "encoder inline\n";
    const SynonymEncoder& enc = *model.preprocessor();
    out << "delta " << detail::format_double(enc.delta()) << '\n';
    out << "k " << enc.k() << '\n';
    out << "order " << enc.order().describe() << '\n';
    out << "vocab " << enc.vocab_digest() << '\n';
    out << "entries " << enc.mapping().size() << '\n';
    std::vector<const std::pair<const std::string, std::string>*> rows;
    rows.reserve(enc.mapping().size());
    for (const auto& kv : enc.mapping()) rows.push_back(&kv);
    std::sort(rows.begin(), rows.end(),
              [](auto* a, auto* b) { return a->first < b->first; });
    for (auto* kv : rows) out << kv->first << '\t' << kv->second << '\n';
  } else {
    out << "encoder none\n";
  }
  if (!out) throw IoError("failed writing model file: " + path);
}

inline LinearTextModel load_model(const std::string& path,
                                  std::shared_ptr<const EmbeddingTable> table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "sem-model v1")
    throw ParseError(path + ": not a v1 model file");
  auto expect_field = [&](const std::string& key) {
    if (!std::getline(in, line) || line.rfind(key + " ", 0) != 0)
      throw ParseError(path + ": missing '" + key + "' field");
    return line.substr(key.size() + 1);
  };
  int classes = 0;
  int dim = 0;
  try {
    classes = std::stoi(expect_field("classes"));
    dim = std::stoi(expect_field("dim"));
  } catch (const std::exception&) {
    throw ParseError(path + ": bad classes/dim");
  }
  const std::string digest = expect_field("vocab");
  if (digest != table->vocab.digest())
    throw ParseError(path + ": vocabulary digest mismatch (model " + digest +
                     ", table " + table->vocab.digest() + ")");
  if (dim != table->dim)
    throw ParseError(path + ": dimension mismatch");

  TrainConfig config;
  {
    std::istringstream cfg(expect_field("config"));
    cfg >> config.epochs >> config.lr >> config.l2 >> config.batch_size >>
        config.seed;
    if (!cfg) throw ParseError(path + ": bad config line");
  }

  auto read_row = [&](double* row, int count) {
    if (!std::getline(in, line))
      throw ParseError(path + ": truncated parameter block");
    const char* p = line.c_str();
    char* next = nullptr;
    for (int j = 0; j < count; ++j) {
      row[j] = std::strtod(p, &next);
      if (next == p) throw ParseError(path + ": bad parameter value");
      p = next;
    }
  };
  if (!std::getline(in, line) || line != "weights")
    throw ParseError(path + ": missing weights block");
  std::vector<double> weights(static_cast<std::size_t>(classes) * dim);
  for (int y = 0; y < classes; ++y)
    read_row(weights.data() + static_cast<std::size_t>(y) * dim, dim);
  if (!std::getline(in, line) || line != "bias")
    throw ParseError(path + ": missing bias block");
  std::vector<double> bias(classes);
  read_row(bias.data(), classes);

  std::optional<SynonymEncoder> preprocessor;
  if (!std::getline(in, line) || line.rfind("encoder", 0) != 0)
    throw ParseError(path + ": missing encoder block");
  if (line == "encoder inline") {
    const double delta = detail::parse_double(expect_field("delta"), path);
    int k = 0;
    std::size_t entries = 0;
    try {
      k = std::stoi(expect_field("k"));
    } catch (const std::exception&) {
      throw ParseError(path + ": bad encoder k");
    }
    const std::string order_text = expect_field("order");
    TraverseOrder order;
    std::size_t sp = order_text.find(' ');
    std::string kind = order_text.substr(0, sp);
    try {
      if (kind == "frequency") {
        order = TraverseOrder::frequency();
      } else if (kind == "prefix") {
        std::size_t sp2 = order_text.find(' ', sp + 1);
        order = TraverseOrder::fixed_prefix(
            std::stoull(order_text.substr(sp + 1, sp2 - sp - 1)),
            std::stoull(order_text.substr(sp2 + 1)));
      } else if (kind == "random") {
        order = TraverseOrder::random(std::stoull(order_text.substr(sp + 1)));
      } else {
        throw ParseError(path + ": unknown encoder order '" + kind + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError(path + ": bad encoder order");
    }
    const std::string enc_digest = expect_field("vocab");
    try {
      entries = std::stoull(expect_field("entries"));
    } catch (const std::exception&) {
      throw ParseError(path + ": bad encoder entry count");
    }
    std::unordered_map<std::string, std::string> mapping;
    mapping.reserve(entries);
    for (std::size_t i = 0; i < entries; ++i) {
      if (!std::getline(in, line))
        throw ParseError(path + ": truncated encoder mapping");
      auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw ParseError(path + ": encoder entry without tab");
      mapping.emplace(line.substr(0, tab), line.substr(tab + 1));
    }
    preprocessor = SynonymEncoder(std::move(mapping), delta, k, order,
                                  enc_digest);
  } else if (line != "encoder none") {
    throw ParseError(path + ": bad encoder block '" + line + "'");
  }

  LinearTextModel model(std::move(table), classes, std::move(preprocessor));
  model.weights() = std::move(weights);
  model.bias() = std::move(bias);
  model.set_config(config);
  return model;
}

}  // namespace sem
