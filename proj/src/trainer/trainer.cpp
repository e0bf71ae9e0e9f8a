#include "esc/trainer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "esc/error.hpp"
#include "esc/setrep/representation.hpp"

namespace esc::train {

namespace {

constexpr std::uint64_t kFeatureInitTag = 0xFEA7;
constexpr std::uint64_t kPolicyInitTag = 0x9011;
constexpr std::size_t kEvalChunk = 1024;

std::vector<std::size_t> dims(std::size_t in, const std::vector<std::size_t>& hidden,
                              std::size_t out) {
  std::vector<std::size_t> d{in};
  d.insert(d.end(), hidden.begin(), hidden.end());
  d.push_back(out);
  return d;
}

std::vector<const ObservationSet*> gather(const data::Dataset& ds,
                                          std::span<const std::size_t> indices) {
  std::vector<const ObservationSet*> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= ds.samples.size()) throw ShapeError("sample index out of range");
    out.push_back(&ds.samples[i].obs);
  }
  return out;
}

// Policy input for each sample, one row per sample. For ESC also returns the
// feature-net cache needed to push gradients through the sum pool.
struct PolicyInput {
  nn::Matrix states;
  std::optional<EscCache> esc_cache;
};

PolicyInput build_inputs(const Model& model, const std::vector<const ObservationSet*>& obs,
                         Rng* perm_rng, bool keep_cache) {
  PolicyInput in;
  const std::size_t batch = obs.size();
  const std::size_t width = model.policy.input_dim();
  in.states = nn::Matrix(batch, width);
  if (model.method == Method::Esc) {
    const auto set_batch = make_set_batch(obs);
    nn::Matrix x_set;
    if (keep_cache) {
      auto fwd = esc_forward_batch(set_batch, *model.feature);
      x_set = std::move(fwd.x_set);
      in.esc_cache = std::move(fwd.cache);
    } else {
      x_set = segment_sum(nn::mlp_predict(*model.feature, set_batch.vehicles), set_batch.offsets);
    }
    const std::size_t d3 = x_set.cols();
    for (std::size_t b = 0; b < batch; ++b) {
      auto row = in.states.row(b);
      auto pooled = x_set.row(b);
      auto xe = obs[b]->x_else();
      if (d3 + xe.size() != width) throw ShapeError("policy input width mismatch");
      std::copy(pooled.begin(), pooled.end(), row.begin());
      std::copy(xe.begin(), xe.end(), row.begin() + static_cast<std::ptrdiff_t>(d3));
    }
    return in;
  }

  for (std::size_t b = 0; b < batch; ++b) {
    const ObservationSet& o = *obs[b];
    if (o.vehicle_count() != model.set_size) {
      throw ShapeError(to_string(model.method) + " model expects M=" +
                       std::to_string(model.set_size) + ", sample has " +
                       std::to_string(o.vehicle_count()));
    }
    StateVector s;
    if (model.method == Method::Ap) {
      if (perm_rng == nullptr) throw ConfigError("AP representation needs a permutation stream");
      s = ap_represent(o, sample_permutation(o.vehicle_count(), *perm_rng));
    } else {
      s = fp_represent(o);
    }
    if (s.values.size() != width) throw ShapeError("policy input width mismatch");
    std::copy(s.values.begin(), s.values.end(), in.states.row(b).begin());
  }
  return in;
}

}  // namespace

Model make_model(const data::ExperimentConfig& cfg, Method method, std::uint64_t seed) {
  Model m;
  m.method = method;
  const auto& arch = cfg.architecture;
  if (method == Method::Esc) {
    m.feature = nn::init_params(dims(cfg.d1, arch.feature_hidden, cfg.d3),
                                derive_seed(seed, kFeatureInitTag));
    m.policy = nn::init_params(dims(cfg.d3 + cfg.d2, arch.policy_hidden, 1),
                               derive_seed(seed, kPolicyInitTag));
    return m;
  }
  if (cfg.set_size.variable) {
    throw ConfigError(to_string(method) + " requires a fixed set size");
  }
  m.set_size = cfg.set_size.fixed_m;
  const auto d = dims(m.set_size * cfg.d1 + cfg.d2, arch.baseline_hidden, 1);
  auto acts = nn::default_activations(d.size() - 1);
  if (!arch.baseline_hidden.empty()) acts.at(arch.baseline_linear_layer) = nn::Activation::Linear;
  m.policy = nn::init_params(d, derive_seed(seed, kPolicyInitTag), nn::InitScheme::GlorotUniform,
                             std::move(acts));
  return m;
}

std::vector<double> predict(const Model& model, const data::Dataset& ds,
                            std::span<const std::size_t> indices, Rng* perm_rng) {
  std::vector<double> out;
  out.reserve(indices.size());
  for (std::size_t start = 0; start < indices.size(); start += kEvalChunk) {
    const auto chunk = indices.subspan(start, std::min(kEvalChunk, indices.size() - start));
    const auto in = build_inputs(model, gather(ds, chunk), perm_rng, false);
    const auto y = nn::mlp_predict(model.policy, in.states);
    for (std::size_t b = 0; b < y.rows(); ++b) out.push_back(y(b, 0));
  }
  return out;
}

BatchGradients batch_gradients(const Model& model, const data::Dataset& ds,
                               std::span<const std::size_t> indices, Rng* perm_rng) {
  if (indices.empty()) throw ShapeError("batch_gradients: empty batch");
  const auto obs = gather(ds, indices);
  auto in = build_inputs(model, obs, perm_rng, true);
  auto fwd = nn::mlp_forward(model.policy, in.states);

  const std::size_t batch = indices.size();
  const double inv = 1.0 / static_cast<double>(batch);
  nn::Matrix grad_out(batch, 1);
  BatchGradients g;
  for (std::size_t b = 0; b < batch; ++b) {
    const double err = fwd.output(b, 0) - ds.samples[indices[b]].label;
    g.loss += err * err;
    grad_out(b, 0) = 2.0 * err * inv;
  }
  g.loss *= inv;

  auto back = nn::mlp_backward(model.policy, fwd.cache, grad_out);
  g.policy = std::move(back.grads);
  if (model.method == Method::Esc) {
    const std::size_t d3 = model.feature->output_dim();
    nn::Matrix grad_xset(batch, d3);
    for (std::size_t b = 0; b < batch; ++b) {
      auto src = back.grad_input.row(b);
      std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(d3), grad_xset.row(b).begin());
    }
    g.feature = esc_backward(*in.esc_cache, *model.feature, grad_xset);
  }
  return g;
}

double evaluate_rmse(const Model& model, const data::Dataset& test_set, std::uint64_t eval_seed) {
  if (test_set.samples.empty()) throw ConfigError("evaluate_rmse: empty test set");
  std::vector<std::size_t> idx(test_set.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng = Rng::stream(eval_seed, Stream::Eval);
  const auto pred = predict(model, test_set, idx, &rng);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - test_set.samples[i].label;
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(pred.size()));
}

std::string RunMetrics::method_label() const {
  if (method == Method::Esc && !trained_on.empty() && trained_on != case_label) return "ESC_var";
  return to_string(method);
}

namespace {

// Fills `result` as training progresses so a caller catching an exception
// still sees the trace reached.
void train_into(const data::ExperimentConfig& cfg, const data::Dataset& train_set,
                const data::Dataset& test_set, Method method, std::uint64_t seed,
                std::vector<CrossEval>* cross_evals, TrainResult& result) {
  const auto started = std::chrono::steady_clock::now();
  if (train_set.samples.empty()) throw ConfigError("train: empty training set");
  if (train_set.header.d1 != cfg.d1 || train_set.header.d2 != cfg.d2) {
    throw ConfigError("train: dataset dimensions differ from config");
  }
  if (method != Method::Esc && train_set.header.set_size.variable) {
    throw ConfigError("train: " + to_string(method) + " cannot train on variable-size sets");
  }

  data::ExperimentConfig run_cfg = cfg;
  run_cfg.set_size = train_set.header.set_size;
  run_cfg.method = method;

  result.model = make_model(run_cfg, method, seed);
  Model& model = result.model;
  RunMetrics& metrics = result.metrics;
  metrics.method = method;
  metrics.case_label = test_set.header.set_size.label(test_set.header.max_set_size);
  metrics.trained_on = train_set.header.set_size.label(train_set.header.max_set_size);
  metrics.benchmark_id = static_cast<int>(train_set.header.benchmark_id);
  metrics.seed = seed;

  std::optional<nn::AdamState>& feature_adam = result.feature_adam;
  if (model.feature) feature_adam = nn::AdamState::fresh(*model.feature);
  nn::AdamState& policy_adam = result.policy_adam;
  policy_adam = nn::AdamState::fresh(model.policy);

  Rng perm_rng = Rng::stream(seed, Stream::Permutation);
  const std::uint64_t shuffle_root = derive_seed(seed, static_cast<std::uint64_t>(Stream::Shuffle));
  std::uint64_t epoch = 0;
  data::BatchIterator batches(train_set, cfg.batch_size, derive_seed(shuffle_root, epoch));
  auto next_batch = [&]() {
    auto b = batches.next();
    if (!b) {
      batches = data::BatchIterator(train_set, cfg.batch_size, derive_seed(shuffle_root, ++epoch));
      b = batches.next();
    }
    return std::move(b->indices);
  };

  auto record = [&](std::size_t iteration, double loss) {
    TracePoint p{iteration, loss, evaluate_rmse(model, test_set, cfg.eval_seed)};
    metrics.trace.push_back(p);
    metrics.final_rmse = p.test_rmse;
    if (cross_evals) {
      for (auto& ce : *cross_evals) {
        ce.trace.push_back({iteration, loss, evaluate_rmse(model, *ce.test_set, cfg.eval_seed)});
      }
    }
  };

  {
    // Loss of the first batch at the initial parameters. AP permutations for
    // this probe come from the evaluation stream so training is unaffected.
    data::BatchIterator probe(train_set, cfg.batch_size, derive_seed(shuffle_root, 0));
    const auto first = probe.next()->indices;
    Rng probe_rng = Rng::stream(cfg.eval_seed, Stream::Eval);
    const auto pred = predict(model, train_set, first, &probe_rng);
    double loss = 0.0;
    for (std::size_t b = 0; b < first.size(); ++b) {
      const double e = pred[b] - train_set.samples[first[b]].label;
      loss += e * e;
    }
    record(0, loss / static_cast<double>(first.size()));
  }

  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    const auto indices = next_batch();
    auto g = batch_gradients(model, train_set, indices, &perm_rng);
    if (!std::isfinite(g.loss)) {
      std::ostringstream msg;
      msg << "non-finite loss at iteration " << it << " (lr=" << cfg.learning_rate
          << ", |grad policy|=" << std::sqrt(g.policy.squared_norm());
      if (g.feature) msg << ", |grad feature|=" << std::sqrt(g.feature->squared_norm());
      msg << ")";
      throw DivergenceError(msg.str());
    }
    try {
      if (g.feature) nn::adam_step(*model.feature, *g.feature, *feature_adam, cfg.learning_rate);
      nn::adam_step(model.policy, g.policy, policy_adam, cfg.learning_rate);
    } catch (const OptimizerError& e) {
      throw DivergenceError("iteration " + std::to_string(it) + ": " + e.what());
    }
    if (it % cfg.eval_interval == 0 || it == cfg.iterations) record(it, g.loss);
  }

  metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
}

}  // namespace

TrainResult train(const data::ExperimentConfig& cfg, const data::Dataset& train_set,
                  const data::Dataset& test_set, Method method, std::uint64_t seed,
                  std::vector<CrossEval>* cross_evals) {
  TrainResult result;
  train_into(cfg, train_set, test_set, method, seed, cross_evals, result);
  return result;
}

TrainResult train_recorded(const data::ExperimentConfig& cfg, const data::Dataset& train_set,
                           const data::Dataset& test_set, Method method, std::uint64_t seed,
                           std::vector<CrossEval>* cross_evals) {
  TrainResult result;
  try {
    train_into(cfg, train_set, test_set, method, seed, cross_evals, result);
  } catch (const DivergenceError& e) {
    result.metrics.failure = e.what();
  }
  return result;
}

}  // namespace esc::train
