#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "webextractor/kg/graph.hpp"

namespace wex::linker {

struct Candidate {
  kg::EntityId entity;
  std::string matched_name;  // the label or alias that matched
};

// Entities with a label or alias equal to text under normalize_name, by id.
// Precondition error on blank text.
std::vector<Candidate> gather_candidates(std::string_view text, const kg::KnowledgeGraph& kg);

// Sparse vector as (index, value) pairs with ascending indices.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

double dot(const std::vector<double>& w, const SparseVector& f);

class FeatureSpace {
 public:
  FeatureSpace() = default;
  // Indices follow entity id order.
  explicit FeatureSpace(const std::set<kg::EntityId>& neighbors);

  std::optional<std::size_t> find(const kg::EntityId& id) const;
  std::size_t dimension() const { return index_.size(); }
  const std::map<kg::EntityId, std::size_t>& index() const { return index_; }

 private:
  std::map<kg::EntityId, std::size_t> index_;
};

// One-hot over the entity's outgoing neighbors that the space knows.
SparseVector featurize(const kg::EntityId& entity, const kg::KnowledgeGraph& kg, const FeatureSpace& space);

struct LinkTrainingInstance {
  kg::EntityId gold;
  std::vector<kg::EntityId> confusables;  // share a name with gold, gold excluded
  bool trivial = false;                   // no confusables
};

struct TrainingSet {
  kg::PropertyId property;
  std::vector<LinkTrainingInstance> instances;
  FeatureSpace space;
};

// Samples item objects of p (seeded), skipping claims whose subject is in
// exclude_subjects. Training error when nothing is left.
TrainingSet build_training(const kg::PropertyId& p, const kg::KnowledgeGraph& kg, std::size_t sample_size,
                           std::uint64_t seed, const std::set<kg::EntityId>& exclude_subjects = {});

struct Hyperparameters {
  double l2 = 1e-4;
  double step = 0.1;
  int max_epochs = 500;
  double tolerance = 1e-8;  // relative loss change

  nlohmann::json to_json() const;
  static Hyperparameters from_json(const nlohmann::json& j);
};

// sum over pairs of log(1 + exp(-(w.f_gold - w.f_confusable))) + l2/2 * |w|^2
class PairwiseObjective {
 public:
  PairwiseObjective(std::vector<std::pair<SparseVector, SparseVector>> pairs, std::size_t dimension, double l2);

  double loss(const std::vector<double>& w) const;
  std::vector<double> gradient(const std::vector<double>& w) const;

  std::size_t pairs() const { return pairs_.size(); }
  std::size_t dimension() const { return dimension_; }

 private:
  std::vector<std::pair<SparseVector, SparseVector>> pairs_;
  std::size_t dimension_;
  double l2_;
};

PairwiseObjective make_objective(const TrainingSet& training, const kg::KnowledgeGraph& kg, double l2);

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  std::vector<double> loss_curve;  // loss after each accepted step, first entry at w = 0
  Hyperparameters hyper;
  std::size_t instances = 0;
  std::size_t pairs = 0;
};

struct RankingModel {
  kg::PropertyId property;
  FeatureSpace space;
  std::vector<double> weights;  // one per feature
  double bias = 0.0;            // cancels in the pairwise loss; kept for the scoring form
  TrainingMeta meta;

  double score(const SparseVector& f) const { return dot(weights, f) + bias; }
  double weight_of(const kg::EntityId& neighbor) const;

  // Sorted keys; weights stored sparsely by neighbor id.
  nlohmann::json to_json() const;
  static RankingModel from_json(const nlohmann::json& j);
};

// Full-batch gradient descent; a step that raises the loss is retried at
// half the step size. Training error without any confusable pair or when
// the loss stops being finite.
RankingModel train_ranker(const TrainingSet& training, const kg::KnowledgeGraph& kg, const Hyperparameters& hyper = {},
                          std::uint64_t seed = 0);

struct ScoredEntity {
  kg::EntityId entity;
  double score = 0.0;
  std::string matched_name;
};

// Candidates scored by the model, best first, ties by entity id.
std::vector<ScoredEntity> link(std::string_view text, const kg::PropertyId& p, const RankingModel& model,
                               const kg::KnowledgeGraph& kg);

// Percentage of lists whose first entry is the gold; empty lists miss.
double evaluate_hit1(const std::vector<std::vector<kg::EntityId>>& ranked, const std::vector<kg::EntityId>& golds);

}  // namespace wex::linker
