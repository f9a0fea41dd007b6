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

#include "crf.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "eval.h"
#include "status.h"
#include "util.h"

namespace nerpipe {

namespace {

// Scores at or below this are treated as forbidden.
constexpr double kForbiddenThreshold = kForbidden / 2;

inline double LogSumExp(const double* x, int n) {
  double m = x[0];
  for (int i = 1; i < n; ++i) m = std::max(m, x[i]);
  if (m <= kForbiddenThreshold) return m;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::exp(x[i] - m);
  return m + std::log(sum);
}

void CheckShape(const EmissionTable& emissions, const CrfParams& params) {
  if (emissions.rows() > 0 &&
      emissions.cols() != static_cast<std::size_t>(params.num_tags)) {
    throw Error(ErrorCode::kShapeMismatch,
                "emission table has " + std::to_string(emissions.cols()) +
                    " columns, model has " + std::to_string(params.num_tags) +
                    " tags");
  }
}

// alpha(i, y): log-sum of scores of prefixes ending in y at i.
Matrix Forward(const EmissionTable& e, const CrfParams& p) {
  const int L = static_cast<int>(e.rows());
  const int T = p.num_tags;
  Matrix alpha(L, T);
  std::vector<double> buf(T);
  for (int y = 0; y < T; ++y) alpha(0, y) = p.Start(y) + e(0, y);
  for (int i = 1; i < L; ++i) {
    for (int y = 0; y < T; ++y) {
      for (int from = 0; from < T; ++from) {
        buf[from] = alpha(i - 1, from) + p.Transition(from, y);
      }
      alpha(i, y) = LogSumExp(buf.data(), T) + e(i, y);
    }
  }
  return alpha;
}

// beta(i, y): log-sum of scores of suffixes after position i given y at i.
Matrix Backward(const EmissionTable& e, const CrfParams& p) {
  const int L = static_cast<int>(e.rows());
  const int T = p.num_tags;
  Matrix beta(L, T);
  std::vector<double> buf(T);
  for (int y = 0; y < T; ++y) beta(L - 1, y) = p.End(y);
  for (int i = L - 2; i >= 0; --i) {
    for (int y = 0; y < T; ++y) {
      for (int to = 0; to < T; ++to) {
        buf[to] = p.Transition(y, to) + e(i + 1, to) + beta(i + 1, to);
      }
      beta(i, y) = LogSumExp(buf.data(), T);
    }
  }
  return beta;
}

double FinalLogPartition(const Matrix& alpha, const CrfParams& p) {
  const int T = p.num_tags;
  std::vector<double> buf(T);
  for (int y = 0; y < T; ++y) buf[y] = alpha(alpha.rows() - 1, y) + p.End(y);
  return LogSumExp(buf.data(), T);
}

}  // namespace

CrfParams CrfParams::Unconstrained(int num_tags) {
  CrfParams p;
  p.num_tags = num_tags;
  p.transitions = Matrix(num_tags, num_tags);
  p.start.assign(num_tags, 0.0);
  p.end.assign(num_tags, 0.0);
  p.allowed.assign(num_tags * num_tags, 1);
  p.start_allowed.assign(num_tags, 1);
  p.end_allowed.assign(num_tags, 1);
  return p;
}

CrfParams CrfParams::ForScheme(const LabelScheme& scheme, bool constrained) {
  const int T = scheme.num_tags();
  CrfParams p = Unconstrained(T);
  if (!constrained) return p;
  for (int to = 0; to < T; ++to) {
    if (!LabelScheme::IsInside(to)) continue;
    p.start_allowed[to] = 0;
    for (int from = 0; from < T; ++from) {
      bool same_entity = from != LabelScheme::kOutside &&
                         LabelScheme::LabelOf(from) == LabelScheme::LabelOf(to);
      if (!same_entity) p.allowed[from * T + to] = 0;
    }
  }
  return p;
}

bool IsValidSequence(const CrfParams& params, const TagSequence& tags) {
  if (tags.empty()) return true;
  if (!params.start_allowed[tags.front()] || !params.end_allowed[tags.back()]) {
    return false;
  }
  for (std::size_t i = 1; i < tags.size(); ++i) {
    if (!params.IsAllowed(tags[i - 1], tags[i])) return false;
  }
  return true;
}

double SequenceScore(const EmissionTable& emissions, const CrfParams& params,
                     const TagSequence& tags) {
  if (tags.empty()) return 0.0;
  double score = params.Start(tags[0]) + params.End(tags.back());
  for (std::size_t i = 0; i < tags.size(); ++i) {
    score += emissions(i, tags[i]);
    if (i > 0) score += params.Transition(tags[i - 1], tags[i]);
  }
  return score;
}

double LogPartition(const EmissionTable& emissions, const CrfParams& params) {
  CheckShape(emissions, params);
  if (emissions.rows() == 0) return 0.0;
  return FinalLogPartition(Forward(emissions, params), params);
}

Marginals ComputeMarginals(const EmissionTable& emissions,
                           const CrfParams& params) {
  CheckShape(emissions, params);
  Marginals m;
  const int L = static_cast<int>(emissions.rows());
  const int T = params.num_tags;
  m.unary = Matrix(L, T);
  if (L == 0) return m;
  Matrix alpha = Forward(emissions, params);
  Matrix beta = Backward(emissions, params);
  const double log_z = FinalLogPartition(alpha, params);
  m.log_partition = log_z;
  for (int i = 0; i < L; ++i) {
    for (int y = 0; y < T; ++y) {
      m.unary(i, y) = std::exp(alpha(i, y) + beta(i, y) - log_z);
    }
  }
  m.pairwise.reserve(L > 0 ? L - 1 : 0);
  for (int i = 0; i + 1 < L; ++i) {
    Matrix pair(T, T);
    for (int a = 0; a < T; ++a) {
      for (int b = 0; b < T; ++b) {
        if (!params.IsAllowed(a, b)) continue;
        pair(a, b) = std::exp(alpha(i, a) + params.transitions(a, b) +
                              emissions(i + 1, b) + beta(i + 1, b) - log_z);
      }
    }
    m.pairwise.push_back(std::move(pair));
  }
  return m;
}

TagSequence ViterbiDecode(const EmissionTable& emissions,
                          const CrfParams& params) {
  CheckShape(emissions, params);
  const int L = static_cast<int>(emissions.rows());
  const int T = params.num_tags;
  if (L == 0) return {};
  thread_local std::vector<double> buffer;
  thread_local std::vector<int> back;
  buffer.resize(static_cast<std::size_t>(T) * (T + 2));
  back.resize(static_cast<std::size_t>(L) * T);
  double* trans = buffer.data();  // column-major: trans[to * T + from]
  double* score = trans + T * T;
  double* next = score + T;
  for (int from = 0; from < T; ++from) {
    for (int to = 0; to < T; ++to) trans[to * T + from] = params.Transition(from, to);
  }
  const double* e = emissions.data().data();
  for (int y = 0; y < T; ++y) score[y] = params.Start(y) + e[y];
  for (int i = 1; i < L; ++i) {
    const double* ei = e + static_cast<std::size_t>(i) * T;
    int* bi = back.data() + static_cast<std::size_t>(i) * T;
    for (int y = 0; y < T; ++y) {
      const double* ty = trans + y * T;
      double best = score[0] + ty[0];
      int arg = 0;
      for (int from = 1; from < T; ++from) {
        double s = score[from] + ty[from];
        if (s > best) {
          best = s;
          arg = from;
        }
      }
      next[y] = best + ei[y];
      bi[y] = arg;
    }
    std::swap(score, next);
  }
  double best = score[0] + params.End(0);
  int last = 0;
  for (int y = 1; y < T; ++y) {
    double s = score[y] + params.End(y);
    if (s > best) {
      best = s;
      last = y;
    }
  }
  if (best <= kForbiddenThreshold) {
    throw Error(ErrorCode::kInfeasible,
                "constraint mask admits no tag sequence");
  }
  TagSequence tags(L);
  tags[L - 1] = last;
  for (int i = L - 1; i > 0; --i) {
    tags[i - 1] = back[static_cast<std::size_t>(i) * T + tags[i]];
  }
  return tags;
}

double NllAndGradient(const EmissionTable& emissions, const CrfParams& params,
                      const TagSequence& gold, CrfGradient* gradient) {
  CheckShape(emissions, params);
  const int L = static_cast<int>(emissions.rows());
  const int T = params.num_tags;
  if (gold.size() != emissions.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                "gold has " + std::to_string(gold.size()) + " tags for " +
                    std::to_string(L) + " positions");
  }
  for (int tag : gold) {
    if (tag < 0 || tag >= T) {
      throw Error(ErrorCode::kInvalidGold, "gold tag index out of range");
    }
  }
  if (!IsValidSequence(params, gold)) {
    throw Error(ErrorCode::kInvalidGold,
                "gold sequence violates the constraint mask");
  }
  Marginals m = ComputeMarginals(emissions, params);
  const double loss = m.log_partition - SequenceScore(emissions, params, gold);
  if (gradient == nullptr) return loss;

  gradient->transitions = Matrix(T, T);
  gradient->start.assign(T, 0.0);
  gradient->end.assign(T, 0.0);
  gradient->emissions = m.unary;
  if (L == 0) return loss;
  for (int i = 0; i < L; ++i) gradient->emissions(i, gold[i]) -= 1.0;
  for (int y = 0; y < T; ++y) {
    if (params.start_allowed[y]) gradient->start[y] = m.unary(0, y);
    if (params.end_allowed[y]) gradient->end[y] = m.unary(L - 1, y);
  }
  gradient->start[gold.front()] -= 1.0;
  gradient->end[gold.back()] -= 1.0;
  for (int i = 0; i + 1 < L; ++i) {
    for (int a = 0; a < T; ++a) {
      for (int b = 0; b < T; ++b) {
        gradient->transitions(a, b) += m.pairwise[i](a, b);
      }
    }
    gradient->transitions(gold[i], gold[i + 1]) -= 1.0;
  }
  return loss;
}

CrfModel CrfModel::Create(const LabelScheme& scheme,
                          const EmitterConfig& config, bool constrained,
                          EmitterKind kind) {
  CrfModel model;
  model.scheme_ = scheme;
  model.constrained_ = constrained;
  model.kind_ = kind;
  model.params_ = CrfParams::ForScheme(scheme, constrained);
  if (kind == EmitterKind::kHashed) {
    model.emitter_ = FeatureEmitter(config, scheme.num_tags());
  } else {
    EmitterConfig tiny = config;
    tiny.hash_bits = 1;
    model.emitter_ = FeatureEmitter(tiny, scheme.num_tags());
  }
  return model;
}

EmissionTable CrfModel::Emissions(const Sentence& sentence) const {
  if (kind_ == EmitterKind::kExternal) {
    throw Error(ErrorCode::kInvalidArgument,
                "model uses external emissions; none supplied for sentence " +
                    sentence.id);
  }
  return emitter_.Emissions(sentence.chars);
}

TagSequence CrfModel::Decode(const Sentence& sentence,
                             const EmissionTable* external) const {
  if (external != nullptr) {
    if (external->rows() != sentence.length()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "sentence " + sentence.id + ": emission rows do not match "
                                              "sentence length");
    }
    return ViterbiDecode(*external, params_);
  }
  return ViterbiDecode(Emissions(sentence), params_);
}

SpanList CrfModel::Predict(const Sentence& sentence,
                           const EmissionTable* external) const {
  return TagsToSpans(Decode(sentence, external), scheme_);
}

double ModelObjective(const CrfModel& model, const Sentence& sentence,
                      const TagSequence& gold, double l2,
                      ModelGradient* gradient) {
  const FeatureEmitter& emitter = model.emitter();
  const CrfParams& p = model.params();
  const int T = p.num_tags;
  EmissionTable emissions = emitter.Emissions(sentence.chars);
  CrfGradient g;
  double loss = NllAndGradient(emissions, p, gold, gradient ? &g : nullptr);

  double norm = 0.0;
  for (int a = 0; a < T; ++a) {
    for (int b = 0; b < T; ++b) {
      if (p.IsAllowed(a, b)) norm += p.transitions(a, b) * p.transitions(a, b);
    }
    if (p.start_allowed[a]) norm += p.start[a] * p.start[a];
    if (p.end_allowed[a]) norm += p.end[a] * p.end[a];
  }
  for (std::size_t f = 0; f < emitter.dim(); ++f) {
    for (int y = 0; y < T; ++y) {
      double w = emitter.weight(static_cast<uint32_t>(f), y);
      norm += w * w;
    }
  }
  loss += 0.5 * l2 * norm;
  if (gradient == nullptr) return loss;

  gradient->transitions = g.transitions;
  gradient->start = g.start;
  gradient->end = g.end;
  for (int a = 0; a < T; ++a) {
    for (int b = 0; b < T; ++b) {
      if (p.IsAllowed(a, b)) gradient->transitions(a, b) += l2 * p.transitions(a, b);
    }
    if (p.start_allowed[a]) gradient->start[a] += l2 * p.start[a];
    if (p.end_allowed[a]) gradient->end[a] += l2 * p.end[a];
  }
  gradient->emitter.assign(emitter.dim() * T, 0.0);
  for (std::size_t f = 0; f < emitter.dim(); ++f) {
    for (int y = 0; y < T; ++y) {
      gradient->emitter[f * T + y] = l2 * emitter.weight(static_cast<uint32_t>(f), y);
    }
  }
  for (std::size_t i = 0; i < sentence.length(); ++i) {
    for (uint32_t f : emitter.ExtractFeatures(sentence.chars, i)) {
      for (int y = 0; y < T; ++y) {
        gradient->emitter[std::size_t{f} * T + y] += g.emissions(i, y);
      }
    }
  }
  return loss;
}

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kConfig, "learning_rate must be >= 0");
  }
  if (!(l2 >= 0.0)) throw Error(ErrorCode::kConfig, "l2 must be >= 0");
  if (!(decay >= 0.0)) throw Error(ErrorCode::kConfig, "decay must be >= 0");
  if (max_epochs < 1) throw Error(ErrorCode::kConfig, "max_epochs must be >= 1");
  if (patience < 1) throw Error(ErrorCode::kConfig, "patience must be >= 1");
}

bool EarlyStopping::Update(double score) {
  ++epoch_;
  if (best_epoch_ == 0 || score > best_) {
    best_ = score;
    best_epoch_ = epoch_;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

namespace {

struct Snapshot {
  CrfParams params;
  std::vector<double> raw;
  double scale = 1.0;
};

const EmissionTable* LookupEmissions(const EmissionMap* map,
                                     const Sentence& sentence) {
  if (map == nullptr) return nullptr;
  auto it = map->find(sentence.id);
  if (it == map->end()) {
    throw Error(ErrorCode::kData,
                "no external emissions for sentence " + sentence.id);
  }
  return &it->second;
}

double DevF1(const CrfModel& model, const Dataset& dev,
             const std::string& layer, const EmissionMap* emissions) {
  const auto& gold = dev.layer(layer);
  std::vector<SpanList> predicted(dev.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    predicted[i] = model.Predict(dev.sentence(i),
                                 LookupEmissions(emissions, dev.sentence(i)));
  }
  return EntityPrf(predicted, gold).f1;
}

}  // namespace

FitResult Fit(CrfModel* model, const FitData& data, const TrainConfig& config,
              const EpochCallback& on_epoch) {
  config.Validate();
  if (data.train == nullptr || data.train->empty()) {
    throw Error(ErrorCode::kData, "training set is empty");
  }
  if (data.dev == nullptr || data.dev->empty()) {
    throw Error(ErrorCode::kData, "dev set is empty");
  }
  const bool external = model->emitter_kind() == EmitterKind::kExternal;
  if (external && (data.train_emissions == nullptr || data.dev_emissions == nullptr)) {
    throw Error(ErrorCode::kData, "external-emission model needs emission tables");
  }
  const Dataset& train = *data.train;
  const auto& train_spans = train.layer(data.train_layer);
  data.dev->layer(data.dev_layer);  // fail early when missing

  const LabelScheme& scheme = model->scheme();
  std::vector<TagSequence> gold(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    try {
      gold[i] = SpansToTags(train.sentence(i).length(), train_spans[i], scheme);
    } catch (const Error& e) {
      throw Error(e.code(), "sentence " + train.sentence(i).id + ": " + e.what());
    }
  }

  CrfParams& params = model->mutable_params();
  FeatureEmitter& emitter = model->mutable_emitter();
  const int T = params.num_tags;
  const std::size_t nf = emitter.features_per_position();
  std::vector<uint32_t> ids(nf);

  Rng rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  FitResult result;
  EarlyStopping stopping(config.patience);
  Snapshot best;
  CrfGradient grad;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double lr = config.learning_rate / (1.0 + config.decay * epoch);
    rng.Shuffle(order);
    double total_loss = 0.0;
    for (std::size_t idx : order) {
      const Sentence& sentence = train.sentence(idx);
      if (sentence.length() == 0) continue;
      EmissionTable table;
      const EmissionTable* emissions;
      if (external) {
        emissions = LookupEmissions(data.train_emissions, sentence);
      } else {
        table = emitter.Emissions(sentence.chars);
        emissions = &table;
      }
      double loss = NllAndGradient(*emissions, params, gold[idx], &grad);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::kDivergence,
                    "non-finite loss at epoch " + std::to_string(epoch + 1) +
                        " on sentence " + sentence.id);
      }
      total_loss += loss;

      for (int a = 0; a < T; ++a) {
        for (int b = 0; b < T; ++b) {
          if (!params.IsAllowed(a, b)) continue;
          double& w = params.transitions(a, b);
          w -= lr * (grad.transitions(a, b) + config.l2 * w);
        }
        if (params.start_allowed[a]) {
          params.start[a] -= lr * (grad.start[a] + config.l2 * params.start[a]);
        }
        if (params.end_allowed[a]) {
          params.end[a] -= lr * (grad.end[a] + config.l2 * params.end[a]);
        }
      }
      if (!external) {
        if (config.l2 > 0.0) emitter.ScaleWeights(1.0 - lr * config.l2);
        for (std::size_t i = 0; i < sentence.length(); ++i) {
          emitter.ExtractFeaturesInto(sentence.chars, i, ids.data());
          const double* g = grad.emissions.row(i);
          for (uint32_t f : ids) {
            for (int y = 0; y < T; ++y) emitter.AddToWeight(f, y, -lr * g[y]);
          }
        }
      }
    }
    const double mean_loss = total_loss / static_cast<double>(train.size());
    const double f1 = DevF1(*model, *data.dev, data.dev_layer, data.dev_emissions);
    result.train_loss.push_back(mean_loss);
    result.dev_f1.push_back(f1);
    if (stopping.Update(f1)) {
      best.params = params;
      best.raw = emitter.raw_weights();
      best.scale = emitter.scale();
    }
    if (on_epoch) on_epoch(epoch + 1, mean_loss, f1);
    if (stopping.ShouldStop()) {
      result.stopped_early = epoch + 1 < config.max_epochs;
      break;
    }
  }
  result.best_epoch = stopping.best_epoch();
  params = std::move(best.params);
  emitter.mutable_raw_weights() = std::move(best.raw);
  emitter.set_scale(best.scale);
  model->set_train_seed(config.seed);
  return result;
}

std::vector<TagSequence> DecodeBatch(const CrfModel& model,
                                     const Dataset& dataset, int threads,
                                     const EmissionMap* external) {
  std::vector<TagSequence> out(dataset.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = model.Decode(dataset.sentence(i),
                            LookupEmissions(external, dataset.sentence(i)));
    }
  };
  threads = std::max(1, threads);
  if (threads == 1 || dataset.size() < 2) {
    work(0, dataset.size());
    return out;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (dataset.size() + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    std::size_t begin = std::min(dataset.size(), t * chunk);
    std::size_t end = std::min(dataset.size(), begin + chunk);
    workers.emplace_back([&, t, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace nerpipe
