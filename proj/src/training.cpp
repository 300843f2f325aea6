#include "dage/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>
#include <unordered_set>

#include "dage/error.hpp"
#include "dage/rng.hpp"

namespace dage {

void TrainConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw UsageError(what);
  };
  need(dim > 0, "dim must be positive");
  need(batch_size > 0, "batch_size must be positive");
  need(negatives >= 1, "negatives must be at least 1");
  need(margin > 0, "margin must be positive");
  need(learning_rate > 0, "learning_rate must be positive");
  need(lambda_mono >= 0 && lambda_conj >= 0, "lambdas must be non-negative");
  need(geo.alpha_in > 0 && geo.alpha_in < 1, "alpha_in must be in (0,1)");
  need(geo.softplus_beta > 0, "softplus_beta must be positive");
  need(geo.cone_lambda > 0, "cone_lambda must be positive");
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["geometry"] = geometry_name(geometry);
  j["dim"] = dim;
  j["batch_size"] = batch_size;
  j["negatives"] = negatives;
  j["margin"] = margin;
  j["learning_rate"] = learning_rate;
  j["lambda_mono"] = lambda_mono;
  j["lambda_conj"] = lambda_conj;
  j["steps"] = steps;
  j["seed"] = seed;
  j["alpha_in"] = geo.alpha_in;
  j["softplus_beta"] = geo.softplus_beta;
  j["cone_lambda"] = geo.cone_lambda;
  j["relaxed"] = relaxed;
  j["mined_pool"] = mined_pool;
  j["conj_batch"] = conj_batch;
  j["probe_size"] = probe_size;
  return j;
}

NegativeSample sample_negatives(std::size_t n_entities, const AnswerSet& known, EntityId positive,
                                std::size_t k, Rng& rng) {
  std::size_t excluded = known.size();
  if (!std::binary_search(known.begin(), known.end(), positive)) ++excluded;
  if (n_entities < excluded + k)
    throw TooFewEntities(std::to_string(k) + " negatives requested, " +
                         std::to_string(n_entities > excluded ? n_entities - excluded : 0) + " non-answers available");
  NegativeSample s;
  s.positive = positive;
  std::unordered_set<EntityId> taken;
  while (s.negatives.size() < k) {
    const auto e = static_cast<EntityId>(uniform_index(rng, n_entities));
    if (e == positive || std::binary_search(known.begin(), known.end(), e) || !taken.insert(e).second) continue;
    s.negatives.push_back(e);
  }
  return s;
}

Var answer_loss(Tape& t, ModelParams& m, const Embedding& q, EntityId positive,
                const std::vector<EntityId>& negatives, double margin) {
  Var pos = neg(log_sigmoid(add_scalar(neg(score(t, m, positive, q)), margin)));
  Var acc = t.scalar(0.0);
  for (EntityId e : negatives) acc = add(acc, log_sigmoid(add_scalar(score(t, m, e, q), -margin)));
  return sub(pos, scale(acc, 1.0 / static_cast<double>(negatives.size())));
}

Var mono_loss(Tape& t, ModelParams& m, const Embedding& q, Rng& rng) {
  Var acc = t.scalar(0.0);
  for (const MeetSite& site : q.meets) {
    if (site.members.size() < 2) continue;
    const Var member = site.members[uniform_index(rng, site.members.size())];
    const QueryEmb outer = rel_transform(t, m, site.input, member);
    acc = add(acc, containment_penalty(t, m, site.result, outer));
  }
  return acc;
}

Var conj_preserve_loss(Tape& t, ModelParams& m, const Vocabulary& vocab, const std::vector<const MinedQuery*>& mined) {
  Var acc = t.scalar(0.0);
  if (mined.empty()) return acc;
  for (const MinedQuery* q : mined) {
    // exists (inv (r1 & .. & rk)) . {e}
    const QueryEmb anchor = nominal(t, m, vocab.entity(q->query->args[0]->name));
    const RolePtr meet = normalize_role(q->query->role);
    std::vector<Var> members;
    std::vector<QueryEmb> singles;
    for (const auto& r : meet->args) {
      members.push_back(embed_role(t, m, vocab, r));
      singles.push_back(rel_transform(t, m, anchor, members.back()));
    }
    const QueryEmb combined = rel_transform(t, m, anchor, rcombine(t, m, members));
    acc = add(acc, diff(t, m, combined, intersect(t, m, singles)));
  }
  return scale(acc, 1.0 / static_cast<double>(mined.size()));
}

Adam::Adam(ModelParams& m, double lr) : model_(m), lr_(lr) {
  for (Parameter* p : model_.parameters()) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::step() {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const auto params = model_.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& x = params[k]->value.data;
    const auto& g = params[k]->grad.data;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = b1 * m[i] + (1 - b1) * g[i];
      v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
      x[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
}

namespace {

struct Pair {
  std::size_t query;
  EntityId answer;
};

struct Probe {
  std::vector<std::size_t> meet_queries;
  std::vector<const MinedQuery*> mined;
};

std::pair<double, double> probe_losses(ModelParams& m, const Vocabulary& vocab, const DatasetSplit& split,
                                       const Probe& probe, const TrainConfig& config) {
  Tape t;
  Rng rng = make_rng(config.seed, "train/probe");
  double mono = 0.0;
  for (std::size_t i : probe.meet_queries) {
    t.clear();
    const Embedding e = embed_query(t, m, vocab, split.instances[i].query);
    mono += mono_loss(t, m, e, rng).item();
  }
  if (!probe.meet_queries.empty()) mono /= static_cast<double>(probe.meet_queries.size());
  t.clear();
  const double conj = conj_preserve_loss(t, m, vocab, probe.mined).item();
  return {mono, conj};
}

}  // namespace

TrainResult train(const KnowledgeGraph& kg_train, const DatasetSplit& split, const TrainConfig& config) {
  config.validate();
  if (split.instances.empty()) throw Error("InvalidInput", "training split is empty");
  const Vocabulary vocab{&kg_train.entities(), &kg_train.relations()};

  TrainResult result;
  result.model = ModelParams(config.geometry, config.dim, kg_train.num_entities(), kg_train.num_relations(),
                             config.seed, config.geo);
  ModelParams& model = result.model;

  std::vector<AnswerSet> known;
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < split.instances.size(); ++i) {
    const auto& q = split.instances[i];
    known.push_back(set_union(q.easy_answers, q.hard_answers));
    for (EntityId a : known.back()) pairs.push_back({i, a});
  }
  if (pairs.empty()) throw Error("InvalidInput", "training split has no answers");

  // Constraint terms only exist when meets are embedded.
  const bool constraints = !config.relaxed;
  std::vector<MinedQuery> mined;
  Probe probe;
  if (constraints) {
    Rng mine_rng = make_rng(config.seed, "train/mine");
    mined = mine_rs_queries(kg_train, config.mined_pool, mine_rng);
    for (std::size_t i = 0; i < split.instances.size() && probe.meet_queries.size() < config.probe_size; ++i)
      if (!is_tree_form(split.instances[i].query)) probe.meet_queries.push_back(i);
    for (std::size_t i = 0; i < mined.size() && probe.mined.size() < config.probe_size; ++i)
      probe.mined.push_back(&mined[i]);
    std::tie(result.mono_start, result.conj_start) = probe_losses(model, vocab, split, probe, config);
  }

  Adam adam(model, config.learning_rate);
  Rng batch_rng = make_rng(config.seed, "train/batch");
  Rng neg_rng = make_rng(config.seed, "negatives");
  Rng mono_rng = make_rng(config.seed, "train/mono");
  Rng conj_rng = make_rng(config.seed, "train/conj");
  const EmbedOptions options{config.relaxed};
  Tape t;
  for (std::size_t step = 0; step < config.steps; ++step) {
    t.clear();
    model.zero_grad();
    Var answer = t.scalar(0.0), mono = t.scalar(0.0);
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const Pair& p = pairs[uniform_index(batch_rng, pairs.size())];
      const Embedding e = embed_query(t, model, vocab, split.instances[p.query].query, options);
      const NegativeSample ns = sample_negatives(model.n_entities(), known[p.query], p.answer, config.negatives, neg_rng);
      answer = add(answer, answer_loss(t, model, e, p.answer, ns.negatives, config.margin));
      if (constraints) mono = add(mono, mono_loss(t, model, e, mono_rng));
    }
    const double inv_b = 1.0 / static_cast<double>(config.batch_size);
    answer = scale(answer, inv_b);
    mono = scale(mono, inv_b);
    Var conj = t.scalar(0.0);
    if (constraints && !mined.empty()) {
      std::vector<const MinedQuery*> pick;
      for (std::size_t i = 0; i < config.conj_batch; ++i) pick.push_back(&mined[uniform_index(conj_rng, mined.size())]);
      conj = conj_preserve_loss(t, model, vocab, pick);
    }
    Var total = add(answer, add(scale(mono, config.lambda_mono), scale(conj, config.lambda_conj)));
    t.backward(total);
    adam.step();
    result.trace.push_back({step, answer.item(), mono.item(), conj.item(), total.item()});
  }
  if (constraints) std::tie(result.mono_end, result.conj_end) = probe_losses(model, vocab, split, probe, config);
  return result;
}

void write_loss_trace(const std::vector<LossRow>& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,answer_loss,mono_loss,conj_loss,total\n";
  char buf[256];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", r.step, r.answer, r.mono, r.conj, r.total);
    out << buf;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace dage
