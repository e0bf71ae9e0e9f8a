#include "esc/trainer/grad_check.hpp"

#include <algorithm>

#include "esc/error.hpp"
#include "esc/nn/finite_diff.hpp"
#include "esc/setrep/representation.hpp"
#include "esc/trainer/trainer.hpp"

namespace esc::train {

namespace {

std::vector<std::size_t> pick_coords(std::size_t total, std::size_t limit, Rng& rng) {
  if (limit == 0 || total <= limit) {
    std::vector<std::size_t> all(total);
    for (std::size_t k = 0; k < total; ++k) all[k] = k;
    return all;
  }
  auto perm = sample_permutation(total, rng);
  perm.resize(limit);
  std::sort(perm.begin(), perm.end());
  return perm;
}

std::vector<double> gather(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t k : idx) out.push_back(v[k]);
  return out;
}

std::vector<std::size_t> dims_of(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> d{in};
  d.insert(d.end(), hidden.begin(), hidden.end());
  d.push_back(out);
  return d;
}

}  // namespace

GradCheckResult check_mlp_gradients(const std::string& name, const nn::MlpParams& params,
                                    const GradCheckOptions& opt, Rng& rng) {
  if (opt.batch == 0) throw ConfigError("grad check: batch must be >= 1");
  nn::Matrix x(opt.batch, params.input_dim());
  for (double& v : x.flat()) v = rng.uniform(-1.0, 1.0);
  nn::Matrix target(opt.batch, params.output_dim());
  for (double& v : target.flat()) v = rng.uniform(-1.0, 1.0);

  auto loss_of = [&](const nn::MlpParams& p, const nn::Matrix& in) {
    const auto y = nn::mlp_predict(p, in);
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double e = y.flat()[k] - target.flat()[k];
      s += 0.5 * e * e;
    }
    return s;
  };

  auto fwd = nn::mlp_forward(params, x);
  nn::Matrix grad_out(fwd.output.rows(), fwd.output.cols());
  for (std::size_t k = 0; k < grad_out.size(); ++k) {
    grad_out.flat()[k] = fwd.output.flat()[k] - target.flat()[k];
  }
  const auto back = nn::mlp_backward(params, fwd.cache, grad_out);

  GradCheckResult r;
  r.name = name;
  r.parameters = params.parameter_count();

  const auto theta = nn::flatten(params);
  const auto coords = pick_coords(theta.size(), opt.max_coords, rng);
  nn::MlpParams probe = params;
  const auto numeric = nn::finite_diff_grad_at(
      [&](std::span<const double> values) {
        nn::assign_flat(probe, values);
        return loss_of(probe, x);
      },
      theta, coords, opt.step);
  const auto analytic = gather(nn::flatten(back.grads), coords);
  r.max_rel_error = nn::max_relative_error(analytic, numeric);

  std::vector<double> xin(x.flat().begin(), x.flat().end());
  const auto in_coords = pick_coords(xin.size(), opt.max_coords, rng);
  const auto numeric_in = nn::finite_diff_grad_at(
      [&](std::span<const double> values) {
        return loss_of(params, nn::Matrix(x.rows(), x.cols(), {values.begin(), values.end()}));
      },
      xin, in_coords, opt.step);
  std::vector<double> gin(back.grad_input.flat().begin(), back.grad_input.flat().end());
  r.max_rel_error = std::max(r.max_rel_error, nn::max_relative_error(gather(gin, in_coords), numeric_in));
  r.checked = coords.size() + in_coords.size();
  return r;
}

GradCheckResult check_esc_gradients(const std::string& name, const nn::MlpParams& feature,
                                    const nn::MlpParams& policy, std::size_t max_set_size,
                                    const GradCheckOptions& opt, Rng& rng) {
  if (opt.batch == 0 || max_set_size == 0) throw ConfigError("grad check: empty batch or set size");
  const std::size_t d1 = feature.input_dim();
  const std::size_t d3 = feature.output_dim();
  if (policy.input_dim() < d3 || policy.output_dim() != 1) {
    throw ShapeError("grad check: policy input must start with the " + std::to_string(d3) +
                     " pooled features and produce one output");
  }
  const std::size_t d2 = policy.input_dim() - d3;

  data::Dataset ds;
  ds.header.d1 = static_cast<std::uint32_t>(d1);
  ds.header.d2 = static_cast<std::uint32_t>(d2);
  ds.header.max_set_size = static_cast<std::uint32_t>(max_set_size);
  ds.header.set_size = data::SetSize::any();
  for (std::size_t b = 0; b < opt.batch; ++b) {
    const std::size_t m = 1 + static_cast<std::size_t>(rng.below(max_set_size));
    std::vector<double> veh(m * d1), xe(d2);
    for (double& v : veh) v = rng.uniform(-1.0, 1.0);
    for (double& v : xe) v = rng.uniform(-1.0, 1.0);
    ds.samples.push_back({ObservationSet(d1, std::move(veh), std::move(xe)), rng.uniform(-1.0, 1.0)});
  }
  ds.header.sample_count = ds.samples.size();
  std::vector<std::size_t> idx(opt.batch);
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;

  Model model;
  model.method = Method::Esc;
  model.feature = feature;
  model.policy = policy;
  const auto g = batch_gradients(model, ds, idx, nullptr);

  std::vector<double> theta = nn::flatten(feature);
  const std::size_t nf = theta.size();
  const auto pflat = nn::flatten(policy);
  theta.insert(theta.end(), pflat.begin(), pflat.end());
  std::vector<double> analytic = nn::flatten(*g.feature);
  const auto gp = nn::flatten(g.policy);
  analytic.insert(analytic.end(), gp.begin(), gp.end());

  Model probe = model;
  auto loss = [&](std::span<const double> values) {
    nn::assign_flat(*probe.feature, values.subspan(0, nf));
    nn::assign_flat(probe.policy, values.subspan(nf));
    const auto pred = predict(probe, ds, idx, nullptr);
    double s = 0.0;
    for (std::size_t b = 0; b < pred.size(); ++b) {
      const double e = pred[b] - ds.samples[b].label;
      s += e * e;
    }
    return s / static_cast<double>(pred.size());
  };

  const auto coords = pick_coords(theta.size(), opt.max_coords, rng);
  const auto numeric = nn::finite_diff_grad_at(loss, theta, coords, opt.step);

  GradCheckResult r;
  r.name = name;
  r.parameters = theta.size();
  r.checked = coords.size();
  r.max_rel_error = nn::max_relative_error(gather(analytic, coords), numeric);
  return r;
}

std::vector<GradCheckResult> grad_check_config(const data::ExperimentConfig& cfg, std::uint64_t seed,
                                               const GradCheckOptions& opt) {
  const auto& arch = cfg.architecture;
  const auto feature = nn::init_params(dims_of(cfg.d1, arch.feature_hidden, cfg.d3), derive_seed(seed, 1));
  const auto policy =
      nn::init_params(dims_of(cfg.d3 + cfg.d2, arch.policy_hidden, 1), derive_seed(seed, 2));
  const auto bdims = dims_of(cfg.max_set_size * cfg.d1 + cfg.d2, arch.baseline_hidden, 1);
  auto acts = nn::default_activations(bdims.size() - 1);
  if (!arch.baseline_hidden.empty()) acts.at(arch.baseline_linear_layer) = nn::Activation::Linear;
  const auto baseline = nn::init_params(bdims, derive_seed(seed, 3), nn::InitScheme::GlorotUniform, acts);

  Rng rng = Rng::stream(seed, Stream::Search);
  std::vector<GradCheckResult> out;
  out.push_back(check_mlp_gradients("feature net", feature, opt, rng));
  out.push_back(check_mlp_gradients("policy net", policy, opt, rng));
  out.push_back(check_mlp_gradients("baseline net", baseline, opt, rng));
  out.push_back(check_esc_gradients("ESC joint", feature, policy, cfg.max_set_size, opt, rng));
  return out;
}

}  // namespace esc::train
