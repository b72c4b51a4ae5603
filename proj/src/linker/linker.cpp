#include "webextractor/linker/linker.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "webextractor/error.hpp"
#include "webextractor/util/text.hpp"

namespace wex::linker {

using nlohmann::json;

std::vector<Candidate> gather_candidates(std::string_view text, const kg::KnowledgeGraph& kg) {
  require(!text::trim(text).empty(), ErrorCode::precondition, "cannot link empty text");
  const std::string key = text::normalize_name(text);
  std::vector<Candidate> out;
  for (const auto& id : kg.entities_named(text)) {
    for (const auto& name : kg.fetch_labels_aliases(id)) {
      if (text::normalize_name(name) == key) {
        out.push_back({id, name});
        break;
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.entity < b.entity; });
  return out;
}

double dot(const std::vector<double>& w, const SparseVector& f) {
  double s = 0.0;
  for (const auto& [i, v] : f) s += w.at(i) * v;
  return s;
}

FeatureSpace::FeatureSpace(const std::set<kg::EntityId>& neighbors) {
  std::size_t i = 0;
  for (const auto& n : neighbors) index_.emplace(n, i++);
}

std::optional<std::size_t> FeatureSpace::find(const kg::EntityId& id) const {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  return std::nullopt;
}

SparseVector featurize(const kg::EntityId& entity, const kg::KnowledgeGraph& kg, const FeatureSpace& space) {
  SparseVector f;
  for (const auto& n : kg.fetch_outgoing_neighbors(entity)) {
    if (auto i = space.find(n)) f.emplace_back(*i, 1.0);
  }
  std::sort(f.begin(), f.end());
  return f;
}

TrainingSet build_training(const kg::PropertyId& p, const kg::KnowledgeGraph& kg, std::size_t sample_size,
                           std::uint64_t seed, const std::set<kg::EntityId>& exclude_subjects) {
  std::set<kg::EntityId> objects;
  for (const auto& [subject, object] : kg.source().claims_of_property(p)) {
    if (object.is_item() && !exclude_subjects.count(subject)) objects.insert(object.as_item());
  }
  require(!objects.empty(), ErrorCode::training, "no item objects to train on for " + p.str());
  std::vector<kg::EntityId> golds(objects.begin(), objects.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = golds.size(); i > 1; --i) std::swap(golds[i - 1], golds[rng() % i]);
  if (golds.size() > sample_size) golds.resize(sample_size);
  std::sort(golds.begin(), golds.end());

  TrainingSet out;
  out.property = p;
  std::set<kg::EntityId> neighbors;
  for (const auto& gold : golds) {
    std::set<kg::EntityId> confusables;
    for (const auto& name : kg.fetch_labels_aliases(gold)) {
      for (const auto& id : kg.entities_named(name)) {
        if (id != gold) confusables.insert(id);
      }
    }
    LinkTrainingInstance inst{gold, {confusables.begin(), confusables.end()}, confusables.empty()};
    for (const auto& n : kg.fetch_outgoing_neighbors(gold)) neighbors.insert(n);
    for (const auto& c : inst.confusables) {
      for (const auto& n : kg.fetch_outgoing_neighbors(c)) neighbors.insert(n);
    }
    out.instances.push_back(std::move(inst));
  }
  out.space = FeatureSpace(neighbors);
  return out;
}

json Hyperparameters::to_json() const {
  return {{"l2", l2}, {"step", step}, {"max_epochs", max_epochs}, {"tolerance", tolerance}};
}

Hyperparameters Hyperparameters::from_json(const json& j) {
  Hyperparameters h;
  h.l2 = j.value("l2", h.l2);
  h.step = j.value("step", h.step);
  h.max_epochs = j.value("max_epochs", h.max_epochs);
  h.tolerance = j.value("tolerance", h.tolerance);
  return h;
}

PairwiseObjective::PairwiseObjective(std::vector<std::pair<SparseVector, SparseVector>> pairs, std::size_t dimension,
                                     double l2)
    : pairs_(std::move(pairs)), dimension_(dimension), l2_(l2) {}

namespace {

// log(1 + exp(-m)) without overflow
double softplus_neg(double m) { return std::max(-m, 0.0) + std::log1p(std::exp(-std::abs(m))); }

// 1 / (1 + exp(m))
double sigmoid_neg(double m) {
  if (m >= 0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

}  // namespace

double PairwiseObjective::loss(const std::vector<double>& w) const {
  double total = 0.0;
  for (const auto& [g, c] : pairs_) total += softplus_neg(dot(w, g) - dot(w, c));
  double norm = 0.0;
  for (double x : w) norm += x * x;
  return total + 0.5 * l2_ * norm;
}

std::vector<double> PairwiseObjective::gradient(const std::vector<double>& w) const {
  std::vector<double> grad(dimension_, 0.0);
  for (const auto& [g, c] : pairs_) {
    const double s = sigmoid_neg(dot(w, g) - dot(w, c));
    for (const auto& [i, v] : g) grad[i] -= s * v;
    for (const auto& [i, v] : c) grad[i] += s * v;
  }
  for (std::size_t i = 0; i < dimension_; ++i) grad[i] += l2_ * w[i];
  return grad;
}

PairwiseObjective make_objective(const TrainingSet& training, const kg::KnowledgeGraph& kg, double l2) {
  std::map<kg::EntityId, SparseVector> cache;
  auto features = [&](const kg::EntityId& id) -> const SparseVector& {
    auto it = cache.find(id);
    if (it == cache.end()) it = cache.emplace(id, featurize(id, kg, training.space)).first;
    return it->second;
  };
  std::vector<std::pair<SparseVector, SparseVector>> pairs;
  for (const auto& inst : training.instances) {
    for (const auto& c : inst.confusables) pairs.emplace_back(features(inst.gold), features(c));
  }
  return PairwiseObjective(std::move(pairs), training.space.dimension(), l2);
}

RankingModel train_ranker(const TrainingSet& training, const kg::KnowledgeGraph& kg, const Hyperparameters& hyper,
                          std::uint64_t seed) {
  require(hyper.step > 0 && hyper.l2 >= 0 && hyper.max_epochs >= 0 && hyper.tolerance >= 0, ErrorCode::config,
          "invalid ranker hyperparameters");
  const PairwiseObjective objective = make_objective(training, kg, hyper.l2);
  require(objective.pairs() > 0, ErrorCode::training,
          "no training instance with a confusable for " + training.property.str());

  RankingModel model;
  model.property = training.property;
  model.space = training.space;
  model.weights.assign(training.space.dimension(), 0.0);
  model.meta.seed = seed;
  model.meta.hyper = hyper;
  model.meta.instances = training.instances.size();
  model.meta.pairs = objective.pairs();

  double loss = objective.loss(model.weights);
  model.meta.loss_curve.push_back(loss);
  double step = hyper.step;
  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    const auto grad = objective.gradient(model.weights);
    std::vector<double> next(model.weights.size());
    double next_loss = loss;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = model.weights[i] - step * grad[i];
      next_loss = objective.loss(next);
      if (!std::isfinite(next_loss)) {
        fail(ErrorCode::training, "ranker loss diverged at epoch " + std::to_string(epoch + 1));
      }
      if (next_loss <= loss) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    model.meta.epochs = epoch + 1;
    if (!accepted) break;
    const double change = std::abs(loss - next_loss) / std::max(std::abs(loss), 1e-12);
    model.weights = std::move(next);
    loss = next_loss;
    model.meta.loss_curve.push_back(loss);
    if (change < hyper.tolerance) break;
  }
  return model;
}

double RankingModel::weight_of(const kg::EntityId& neighbor) const {
  auto i = space.find(neighbor);
  return i ? weights.at(*i) : 0.0;
}

json RankingModel::to_json() const {
  json index = json::object();
  json w = json::object();
  for (const auto& [id, i] : space.index()) {
    index[id.str()] = i;
    if (weights.at(i) != 0.0) w[id.str()] = weights.at(i);
  }
  return {{"property", property.str()},
          {"dimension", space.dimension()},
          {"feature_index", std::move(index)},
          {"weights", std::move(w)},
          {"bias", bias},
          {"meta",
           {{"seed", meta.seed},
            {"epochs", meta.epochs},
            {"loss_curve", meta.loss_curve},
            {"hyperparameters", meta.hyper.to_json()},
            {"instances", meta.instances},
            {"pairs", meta.pairs}}}};
}

RankingModel RankingModel::from_json(const json& j) {
  try {
    RankingModel m;
    m.property = kg::PropertyId(j.at("property").get<std::string>());
    std::set<kg::EntityId> ids;
    for (const auto& [id, i] : j.at("feature_index").items()) ids.insert(kg::EntityId(id));
    m.space = FeatureSpace(ids);
    for (const auto& [id, i] : j.at("feature_index").items()) {
      require(m.space.find(kg::EntityId(id)) == i.get<std::size_t>(), ErrorCode::invalid,
              "feature index is not in entity id order");
    }
    require(j.at("dimension").get<std::size_t>() == m.space.dimension(), ErrorCode::invalid,
            "model dimension does not match its feature index");
    m.weights.assign(m.space.dimension(), 0.0);
    for (const auto& [id, v] : j.at("weights").items()) {
      auto i = m.space.find(kg::EntityId(id));
      require(i.has_value(), ErrorCode::invalid, "weight for unindexed feature " + id);
      const double x = v.get<double>();
      require(std::isfinite(x), ErrorCode::invalid, "non-finite weight for " + id);
      m.weights[*i] = x;
    }
    m.bias = j.value("bias", 0.0);
    if (j.contains("meta")) {
      const auto& meta = j.at("meta");
      m.meta.seed = meta.value("seed", std::uint64_t{0});
      m.meta.epochs = meta.value("epochs", 0);
      m.meta.loss_curve = meta.value("loss_curve", std::vector<double>{});
      if (meta.contains("hyperparameters")) m.meta.hyper = Hyperparameters::from_json(meta.at("hyperparameters"));
      m.meta.instances = meta.value("instances", std::size_t{0});
      m.meta.pairs = meta.value("pairs", std::size_t{0});
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid, std::string("malformed ranking model: ") + e.what());
  }
}

std::vector<ScoredEntity> link(std::string_view text, const kg::PropertyId& p, const RankingModel& model,
                               const kg::KnowledgeGraph& kg) {
  require(model.property == p, ErrorCode::precondition,
          "model is for " + model.property.str() + ", not " + p.str());
  std::vector<ScoredEntity> out;
  for (auto& c : gather_candidates(text, kg)) {
    out.push_back({c.entity, model.score(featurize(c.entity, kg, model.space)), std::move(c.matched_name)});
  }
  std::sort(out.begin(), out.end(), [](const ScoredEntity& a, const ScoredEntity& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entity < b.entity;
  });
  return out;
}

double evaluate_hit1(const std::vector<std::vector<kg::EntityId>>& ranked, const std::vector<kg::EntityId>& golds) {
  require(ranked.size() == golds.size(), ErrorCode::evaluation, "one ranked list per gold entity is required");
  if (golds.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (!ranked[i].empty() && ranked[i].front() == golds[i]) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(golds.size());
}

}  // namespace wex::linker
