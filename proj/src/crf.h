// Copyright 2026 The nerpipe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Linear-chain CRF over BIO tags.
//
//   score(x, y) = s(y_1) + sum_i e(i, y_i) + sum_i T(y_{i-1}, y_i) + t(y_L)
//
// Transitions (and start/end moves) rejected by the constraint mask score
// kForbidden instead of -inf so log-space arithmetic never produces NaN.

#ifndef NERPIPE_CRF_H_
#define NERPIPE_CRF_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "corpus.h"
#include "emitter.h"

namespace nerpipe {

inline constexpr double kForbidden = -1e30;

struct CrfParams {
  int num_tags = 0;
  Matrix transitions;         // T(from, to)
  std::vector<double> start;  // s(y)
  std::vector<double> end;    // t(y)
  std::vector<uint8_t> allowed;        // num_tags * num_tags, row = from
  std::vector<uint8_t> start_allowed;
  std::vector<uint8_t> end_allowed;

  static CrfParams Unconstrained(int num_tags);
  // Forbids O -> I-x, start -> I-x and B-x/I-x -> I-y for y != x.
  static CrfParams ForScheme(const LabelScheme& scheme, bool constrained);

  bool IsAllowed(int from, int to) const { return allowed[from * num_tags + to]; }
  double Transition(int from, int to) const {
    return IsAllowed(from, to) ? transitions(from, to) : kForbidden;
  }
  double Start(int y) const { return start_allowed[y] ? start[y] : kForbidden; }
  double End(int y) const { return end_allowed[y] ? end[y] : kForbidden; }

  bool operator==(const CrfParams&) const = default;
};

// True iff every start/transition/end move of `tags` is allowed.
bool IsValidSequence(const CrfParams& params, const TagSequence& tags);
// Unnormalized log score; includes kForbidden terms for invalid moves.
double SequenceScore(const EmissionTable& emissions, const CrfParams& params,
                     const TagSequence& tags);

// Throws ShapeMismatchError when the table width differs from num_tags.
double LogPartition(const EmissionTable& emissions, const CrfParams& params);

struct Marginals {
  double log_partition = 0.0;
  Matrix unary;                  // p(y_i = y), L x T
  std::vector<Matrix> pairwise;  // p(y_i = a, y_{i+1} = b), L-1 of T x T
};

Marginals ComputeMarginals(const EmissionTable& emissions,
                           const CrfParams& params);

// Highest-scoring valid sequence; ties go to the lowest tag index.
// Throws ShapeMismatchError or InfeasibleError.
TagSequence ViterbiDecode(const EmissionTable& emissions,
                          const CrfParams& params);

// Gradient of log_partition - score(gold) (no regularizer).
struct CrfGradient {
  Matrix transitions;
  std::vector<double> start;
  std::vector<double> end;
  Matrix emissions;  // d/d e(i, y) = p(y_i = y) - [gold_i = y]
};

// Negative log-likelihood of `gold` and its gradient. Throws
// InvalidGoldError when gold violates the mask.
double NllAndGradient(const EmissionTable& emissions, const CrfParams& params,
                      const TagSequence& gold, CrfGradient* gradient);

enum class EmitterKind { kHashed, kExternal };

class CrfModel {
 public:
  CrfModel() = default;
  static CrfModel Create(const LabelScheme& scheme, const EmitterConfig& config,
                         bool constrained = true,
                         EmitterKind kind = EmitterKind::kHashed);

  const LabelScheme& scheme() const { return scheme_; }
  bool constrained() const { return constrained_; }
  EmitterKind emitter_kind() const { return kind_; }
  const CrfParams& params() const { return params_; }
  CrfParams& mutable_params() { return params_; }
  const FeatureEmitter& emitter() const { return emitter_; }
  FeatureEmitter& mutable_emitter() { return emitter_; }
  uint64_t train_seed() const { return train_seed_; }
  void set_train_seed(uint64_t seed) { train_seed_ = seed; }

  // External-kind models require a precomputed table.
  EmissionTable Emissions(const Sentence& sentence) const;
  TagSequence Decode(const Sentence& sentence,
                     const EmissionTable* external = nullptr) const;
  SpanList Predict(const Sentence& sentence,
                   const EmissionTable* external = nullptr) const;

  bool operator==(const CrfModel&) const = default;

 private:
  LabelScheme scheme_;
  bool constrained_ = true;
  EmitterKind kind_ = EmitterKind::kHashed;
  CrfParams params_;
  FeatureEmitter emitter_;
  uint64_t train_seed_ = 0;
};

// Full objective for one sentence:
//   log Z - score(gold) + (l2 / 2) * ||theta||^2
// over every unmasked transition/start/end parameter and every emitter
// weight. Gradients are dense; meant for verification on small models.
struct ModelGradient {
  Matrix transitions;
  std::vector<double> start;
  std::vector<double> end;
  std::vector<double> emitter;  // dim x num_tags, effective weights
};
double ModelObjective(const CrfModel& model, const Sentence& sentence,
                      const TagSequence& gold, double l2,
                      ModelGradient* gradient);

struct TrainConfig {
  double learning_rate = 0.1;
  double l2 = 1e-3;
  // Step size at epoch k is learning_rate / (1 + decay * k).
  double decay = 0.0;
  int max_epochs = 30;
  int patience = 3;
  uint64_t seed = 1;

  void Validate() const;
};

// Patience-based stopping on a score that should increase.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when `score` strictly improves on the best so far.
  bool Update(double score);
  bool ShouldStop() const { return stale_ >= patience_; }
  // 1-based epoch of the best score, 0 before any update.
  int best_epoch() const { return best_epoch_; }
  double best_score() const { return best_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int stale_ = 0;
  double best_ = -1.0;
};

struct FitResult {
  std::vector<double> dev_f1;     // per epoch
  std::vector<double> train_loss;  // mean per-sentence NLL per epoch
  int best_epoch = 0;
  bool stopped_early = false;
};

struct FitData {
  const Dataset* train = nullptr;
  std::string train_layer;
  const Dataset* dev = nullptr;
  std::string dev_layer = "gold";
  // Required for external-kind models; keyed by sentence id.
  const EmissionMap* train_emissions = nullptr;
  const EmissionMap* dev_emissions = nullptr;
};

using EpochCallback = std::function<void(int epoch, double loss, double f1)>;

// Per-sentence SGD on the mean NLL, dev entity-F1 after every epoch,
// patience-based stopping and restore of the best-epoch snapshot.
// Throws DataError on empty inputs, DivergenceError on a non-finite loss.
FitResult Fit(CrfModel* model, const FitData& data, const TrainConfig& config,
              const EpochCallback& on_epoch = nullptr);

// Decodes every sentence of `dataset`, splitting the work over `threads`
// workers; output order matches input order.
std::vector<TagSequence> DecodeBatch(const CrfModel& model,
                                     const Dataset& dataset, int threads = 1,
                                     const EmissionMap* external = nullptr);

// Model files: "NERCRF\0\0", u32 format version, u32 header length, JSON
// header, parameter blocks, trailing CRC-32 of everything before it.
inline constexpr uint32_t kModelFormatVersion = 1;

std::string SerializeModel(const CrfModel& model);
// Throws VersionError or CorruptionError.
CrfModel DeserializeModel(std::string_view bytes);
void SaveModel(const CrfModel& model, const std::string& path);
CrfModel LoadModel(const std::string& path);

}  // namespace nerpipe

#endif  // NERPIPE_CRF_H_
