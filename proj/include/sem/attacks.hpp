#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "sem/common.hpp"
#include "sem/embedding.hpp"
#include "sem/model.hpp"
#include "sem/rng.hpp"
#include "sem/vocab.hpp"

namespace sem {

struct AttackBudget {
  std::size_t max_queries = 200000;
  double max_substitution_fraction = 1.0;  // of the token count, per example
  int ga_population = 20;
  int ga_generations = 20;
};

// Outcome of one adversarial search. `success` iff the final label differs
// from the original; substituted positions always hold words drawn from the
// synonym map of the original word at that position.
struct AttackResult {
  bool success = false;
  std::vector<std::string> adversarial_tokens;
  std::vector<std::size_t> substituted_indices;
  std::size_t queries_used = 0;
  int original_label = 0;
  int final_label = 0;
};

namespace detail {

// Counts every confidence evaluation; attacks see the model only through
// this.
class QueryModel {
 public:
  QueryModel(const TextClassifier& model, std::size_t max_queries)
      : model_(model), max_queries_(max_queries) {}

  bool exhausted() const { return used_ >= max_queries_; }
  std::size_t used() const { return used_; }

  std::vector<double> confidences(const std::vector<std::string>& tokens) {
    ++used_;
    return model_.confidences(tokens);
  }

 private:
  const TextClassifier& model_;
  std::size_t max_queries_;
  std::size_t used_ = 0;
};

inline std::vector<std::size_t> diff_indices(
    const std::vector<std::string>& original,
    const std::vector<std::string>& candidate) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < original.size(); ++i)
    if (original[i] != candidate[i]) out.push_back(i);
  return out;
}

inline std::size_t substitution_cap(std::size_t tokens, double fraction) {
  return static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(tokens)));
}

inline void trace_line(std::ostream* trace, std::size_t index,
                       const std::string& old_word,
                       const std::string& new_word, double confidence) {
  if (trace)
    (*trace) << index << '\t' << old_word << '\t' << new_word << '\t'
             << format_double(confidence) << '\n';
}

inline const std::vector<SynonymMember>* members_of(const SynonymMap& syn,
                                                    const std::string& word) {
  auto it = syn.find(word);
  if (it == syn.end() || it->second.members.empty()) return nullptr;
  return &it->second.members;
}

}  // namespace detail

// Greedy search: at each step try every synonym at every untouched position
// and apply the single substitution with the lowest true-label confidence;
// only strict decreases are accepted.
inline AttackResult gsa_attack(const TextClassifier& model,
                               const std::vector<std::string>& tokens,
                               int true_label, const SynonymMap& syn,
                               const AttackBudget& budget,
                               std::ostream* trace = nullptr) {
  detail::QueryModel qm(model, budget.max_queries);
  AttackResult result;
  result.original_label = true_label;
  result.final_label = true_label;
  result.adversarial_tokens = tokens;

  std::vector<double> base = qm.confidences(tokens);
  if (argmax_label(base) != true_label)
    throw PreconditionError("gsa_attack: model already misclassifies input");
  double current_conf = base[true_label];

  const std::size_t n = tokens.size();
  const std::size_t cap =
      detail::substitution_cap(n, budget.max_substitution_fraction);
  std::vector<bool> used(n, false);
  std::vector<std::string> current = tokens;

  while (result.substituted_indices.size() < cap) {
    double best_conf = current_conf;
    std::size_t best_pos = n;
    const std::string* best_word = nullptr;
    int best_label = true_label;
    for (std::size_t p = 0; p < n; ++p) {
      if (used[p]) continue;
      const auto* members = detail::members_of(syn, tokens[p]);
      if (!members) continue;
      for (const auto& member : *members) {
        if (qm.exhausted()) {
          result.queries_used = qm.used();
          return result;
        }
        current[p] = member.token;
        std::vector<double> conf = qm.confidences(current);
        current[p] = tokens[p];
        if (conf[true_label] < best_conf) {
          best_conf = conf[true_label];
          best_pos = p;
          best_word = &member.token;
          best_label = argmax_label(conf);
        }
      }
    }
    if (best_pos == n) break;  // no strict decrease anywhere
    detail::trace_line(trace, best_pos, tokens[best_pos], *best_word,
                       best_conf);
    current[best_pos] = *best_word;
    used[best_pos] = true;
    result.substituted_indices.push_back(best_pos);
    current_conf = best_conf;
    if (best_label != true_label) {
      result.success = true;
      result.final_label = best_label;
      break;
    }
  }
  std::sort(result.substituted_indices.begin(),
            result.substituted_indices.end());
  result.adversarial_tokens = std::move(current);
  result.queries_used = qm.used();
  return result;
}

// True-label confidence drop when token i is blanked by the reserved
// unknown token.
inline double word_saliency(const TextClassifier& model,
                            const std::vector<std::string>& tokens,
                            int true_label, std::size_t i) {
  const double base = model.confidence(tokens, true_label);
  std::vector<std::string> blanked = tokens;
  blanked[i] = std::string(kUnknownToken);
  return base - model.confidence(blanked, true_label);
}

// Greedy attack ordered by softmax-normalized saliency times the best
// per-position confidence drop; positions whose best synonym does not
// strictly reduce the confidence are never substituted.
inline AttackResult pwws_attack(const TextClassifier& model,
                                const std::vector<std::string>& tokens,
                                int true_label, const SynonymMap& syn,
                                const AttackBudget& budget,
                                std::ostream* trace = nullptr) {
  detail::QueryModel qm(model, budget.max_queries);
  AttackResult result;
  result.original_label = true_label;
  result.final_label = true_label;
  result.adversarial_tokens = tokens;

  std::vector<double> base = qm.confidences(tokens);
  if (argmax_label(base) != true_label)
    throw PreconditionError("pwws_attack: model already misclassifies input");
  const double base_conf = base[true_label];
  const std::size_t n = tokens.size();

  std::vector<double> saliency(n, 0.0);
  std::vector<std::string> scratch = tokens;
  for (std::size_t i = 0; i < n; ++i) {
    if (qm.exhausted()) {
      result.queries_used = qm.used();
      return result;
    }
    scratch[i] = std::string(kUnknownToken);
    saliency[i] = base_conf - qm.confidences(scratch)[true_label];
    scratch[i] = tokens[i];
  }
  // softmax over the whole saliency vector
  double smax = *std::max_element(saliency.begin(), saliency.end());
  double denom = 0.0;
  std::vector<double> weight(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = std::exp(saliency[i] - smax);
    denom += weight[i];
  }
  for (double& w : weight) w /= denom;

  struct Candidate {
    std::size_t pos;
    const std::string* word;
    double score;
  };
  std::vector<Candidate> candidates;
  for (std::size_t p = 0; p < n; ++p) {
    const auto* members = detail::members_of(syn, tokens[p]);
    if (!members) continue;
    double best_drop = 0.0;
    const std::string* best_word = nullptr;
    for (const auto& member : *members) {
      if (qm.exhausted()) {
        result.queries_used = qm.used();
        return result;
      }
      scratch[p] = member.token;
      const double drop = base_conf - qm.confidences(scratch)[true_label];
      scratch[p] = tokens[p];
      if (drop > best_drop) {  // strict: non-improving swaps are discarded
        best_drop = drop;
        best_word = &member.token;
      }
    }
    if (best_word) candidates.push_back({p, best_word, weight[p] * best_drop});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.pos < b.pos;
                   });

  const std::size_t cap =
      detail::substitution_cap(n, budget.max_substitution_fraction);
  std::vector<std::string> current = tokens;
  for (const auto& cand : candidates) {
    if (result.substituted_indices.size() >= cap) break;
    if (qm.exhausted()) break;
    current[cand.pos] = *cand.word;
    result.substituted_indices.push_back(cand.pos);
    std::vector<double> conf = qm.confidences(current);
    detail::trace_line(trace, cand.pos, tokens[cand.pos], *cand.word,
                       conf[true_label]);
    if (argmax_label(conf) != true_label) {
      result.success = true;
      result.final_label = argmax_label(conf);
      break;
    }
  }
  std::sort(result.substituted_indices.begin(),
            result.substituted_indices.end());
  result.adversarial_tokens = std::move(current);
  result.queries_used = qm.used();
  return result;
}

// Per-position substitution pools, fixed by the original text so chained
// mutations can never leave the original word's synonym set.
inline std::vector<std::vector<std::string>> make_position_pools(
    const std::vector<std::string>& tokens, const SynonymMap& syn) {
  std::vector<std::vector<std::string>> pools(tokens.size());
  for (std::size_t p = 0; p < tokens.size(); ++p) {
    if (const auto* members = detail::members_of(syn, tokens[p])) {
      pools[p].reserve(members->size());
      for (const auto& m : *members) pools[p].push_back(m.token);
    }
  }
  return pools;
}

namespace detail {

// Replaces one uniformly random position with its confidence-minimizing
// pool word; a position with an empty pool leaves the candidate unchanged.
inline std::vector<std::string> ga_mutate_impl(
    QueryModel& qm, std::vector<std::string> candidate,
    const std::vector<std::vector<std::string>>& pools, int true_label,
    std::mt19937_64& rng) {
  if (candidate.empty()) return candidate;
  std::uniform_int_distribution<std::size_t> pick(0, candidate.size() - 1);
  const std::size_t p = pick(rng);
  const auto& pool = pools[p];
  if (pool.empty()) return candidate;
  double best_conf = std::numeric_limits<double>::infinity();
  const std::string* best = nullptr;
  for (const auto& word : pool) {
    if (qm.exhausted()) break;
    std::string saved = candidate[p];
    candidate[p] = word;
    const double conf = qm.confidences(candidate)[true_label];
    candidate[p] = std::move(saved);
    if (conf < best_conf) {
      best_conf = conf;
      best = &word;
    }
  }
  if (best) candidate[p] = *best;
  return candidate;
}

}  // namespace detail

inline std::vector<std::string> ga_mutate(
    const TextClassifier& model, const std::vector<std::string>& candidate,
    const std::vector<std::vector<std::string>>& pools, int true_label,
    std::mt19937_64& rng, std::size_t* queries = nullptr) {
  detail::QueryModel qm(model, std::numeric_limits<std::size_t>::max());
  auto out = detail::ga_mutate_impl(qm, candidate, pools, true_label, rng);
  if (queries) *queries += qm.used();
  return out;
}

// Position-wise coin flip between two equal-length parents.
inline std::vector<std::string> ga_crossover(
    const std::vector<std::string>& x1, const std::vector<std::string>& x2,
    std::mt19937_64& rng) {
  if (x1.size() != x2.size())
    throw PreconditionError("ga_crossover: parents differ in length");
  std::vector<std::string> child(x1.size());
  std::uniform_int_distribution<int> coin(0, 1);
  for (std::size_t i = 0; i < x1.size(); ++i)
    child[i] = coin(rng) == 0 ? x1[i] : x2[i];
  return child;
}

// Population search: seed by mutating the original, select parents with
// probability proportional to (1 - true-label confidence), crossover, then
// mutate; the best member survives unchanged each generation.
inline AttackResult ga_attack(const TextClassifier& model,
                              const std::vector<std::string>& tokens,
                              int true_label, const SynonymMap& syn,
                              const AttackBudget& budget, std::uint64_t seed,
                              std::ostream* trace = nullptr) {
  detail::QueryModel qm(model, budget.max_queries);
  AttackResult result;
  result.original_label = true_label;
  result.final_label = true_label;
  result.adversarial_tokens = tokens;

  {
    std::vector<double> base = qm.confidences(tokens);
    if (argmax_label(base) != true_label)
      throw PreconditionError("ga_attack: model already misclassifies input");
  }

  std::mt19937_64 rng(seed);
  const auto pools = make_position_pools(tokens, syn);
  const int pop_size = std::max(1, budget.ga_population);

  std::vector<std::vector<std::string>> population;
  population.reserve(pop_size);
  for (int i = 0; i < pop_size; ++i)
    population.push_back(
        detail::ga_mutate_impl(qm, tokens, pools, true_label, rng));

  auto finish_failure = [&](const std::vector<std::string>& member) {
    result.adversarial_tokens = member;
    result.substituted_indices = detail::diff_indices(tokens, member);
    result.queries_used = qm.used();
    return result;
  };

  for (int gen = 0; gen < budget.ga_generations; ++gen) {
    std::vector<double> conf(pop_size);
    std::vector<int> label(pop_size);
    for (int i = 0; i < pop_size; ++i) {
      if (qm.exhausted()) return finish_failure(tokens);
      std::vector<double> c = qm.confidences(population[i]);
      conf[i] = c[true_label];
      label[i] = argmax_label(c);
    }

    int winner = -1;
    for (int i = 0; i < pop_size; ++i) {
      if (label[i] == true_label) continue;
      if (winner < 0 || conf[i] < conf[winner]) winner = i;
    }
    if (winner >= 0) {
      result.success = true;
      result.final_label = label[winner];
      result.adversarial_tokens = population[winner];
      result.substituted_indices =
          detail::diff_indices(tokens, population[winner]);
      result.queries_used = qm.used();
      if (trace) {
        for (std::size_t idx : result.substituted_indices)
          detail::trace_line(trace, idx, tokens[idx],
                             result.adversarial_tokens[idx], conf[winner]);
      }
      return result;
    }

    int elite = 0;
    for (int i = 1; i < pop_size; ++i)
      if (conf[i] < conf[elite]) elite = i;

    // fitness-proportional parent choice via prefix sums
    std::vector<double> cumulative(pop_size);
    double total = 0.0;
    for (int i = 0; i < pop_size; ++i) {
      total += 1.0 - conf[i];
      cumulative[i] = total;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto pick_parent = [&]() -> const std::vector<std::string>& {
      if (total <= 0.0) {
        std::uniform_int_distribution<int> any(0, pop_size - 1);
        return population[any(rng)];
      }
      const double r = unit(rng) * total;
      const auto it =
          std::upper_bound(cumulative.begin(), cumulative.end(), r);
      const int idx = std::min<int>(
          pop_size - 1, static_cast<int>(it - cumulative.begin()));
      return population[idx];
    };

    std::vector<std::vector<std::string>> next;
    next.reserve(pop_size);
    next.push_back(population[elite]);
    for (int i = 1; i < pop_size; ++i) {
      auto child = ga_crossover(pick_parent(), pick_parent(), rng);
      next.push_back(
          detail::ga_mutate_impl(qm, std::move(child), pools, true_label, rng));
    }
    population = std::move(next);
  }

  // generations exhausted: report the strongest surviving candidate
  double best_conf = std::numeric_limits<double>::infinity();
  int best = 0;
  for (int i = 0; i < pop_size; ++i) {
    if (qm.exhausted()) return finish_failure(tokens);
    const double c = qm.confidences(population[i])[true_label];
    if (c < best_conf) {
      best_conf = c;
      best = i;
    }
  }
  return finish_failure(population[best]);
}

// Replaces ceil(fraction * n) distinct positions with uniformly random
// vocabulary words (always different from the word being replaced when the
// vocabulary allows it).
inline std::vector<std::string> random_perturbation(
    const std::vector<std::string>& tokens, double fraction,
    const Vocabulary& vocab, std::mt19937_64& rng) {
  if (fraction < 0.0 || fraction > 1.0)
    throw PreconditionError("perturbation fraction must be in [0, 1]");
  if (vocab.size() == 0)
    throw PreconditionError("cannot perturb with an empty vocabulary");
  std::vector<std::string> out = tokens;
  const std::size_t m = detail::substitution_cap(tokens.size(), fraction);
  std::vector<std::size_t> positions(tokens.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  std::shuffle(positions.begin(), positions.end(), rng);
  std::uniform_int_distribution<int> pick(0,
                                          static_cast<int>(vocab.size()) - 1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t p = positions[i];
    std::string replacement = vocab.word(pick(rng));
    if (vocab.size() > 1)
      while (replacement == out[p]) replacement = vocab.word(pick(rng));
    out[p] = std::move(replacement);
  }
  return out;
}

}  // namespace sem
