/**
 * Copyright 2026 The sslines Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sslines/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sslines/rng.hpp"

namespace sslines {

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::reference() {
  ModelConfig c;
  c.input_size = 512;
  c.encoder = {16, 32, 64, 96, 112};
  c.bottleneck = 112;
  c.head = 48;
  return c;
}

void ModelConfig::validate() const {
  if (input_size <= 0 || input_size % kDownsample != 0) {
    throw ConfigError("model input_size must be a positive multiple of 4, got " + std::to_string(input_size));
  }
  if (encoder.size() < 3) throw ConfigError("model encoder must list at least 3 channel widths");
  for (int c : encoder) {
    if (c <= 0) throw ConfigError("model channel widths must be positive");
  }
  if (bottleneck <= 0 || head <= 0) throw ConfigError("model channel widths must be positive");
  if (stage_convs < 1 || stage_convs > 4) throw ConfigError("model stage_convs must be in [1, 4]");
  if (norm_groups < 0) throw ConfigError("model norm_groups must be non-negative");
  if (!(class_prior > 0.0 && class_prior < 1.0)) throw ConfigError("model class_prior must be in (0, 1)");
}

namespace {

using Activation = LineModel::Activation;

constexpr double kNormEps = 1e-5;

Activation make_act(int c, int h, int w) { return {c, h, w, std::vector<float>(static_cast<std::size_t>(c) * h * w)}; }

/// Nearest-neighbour 2x upsampling cropped to (h, w).
Activation upsample(const Activation& a, int h, int w) {
  Activation out = make_act(a.c, h, w);
  for (int c = 0; c < a.c; ++c) {
    for (int y = 0; y < h; ++y) {
      const float* src = a.data.data() + (static_cast<std::size_t>(c) * a.h + y / 2) * a.w;
      float* dst = out.data.data() + (static_cast<std::size_t>(c) * h + y) * w;
      for (int x = 0; x < w; ++x) dst[x] = src[x / 2];
    }
  }
  return out;
}

void upsample_backward(const Activation& g, Activation& grad_src) {
  for (int c = 0; c < g.c; ++c) {
    for (int y = 0; y < g.h; ++y) {
      const float* src = g.data.data() + (static_cast<std::size_t>(c) * g.h + y) * g.w;
      float* dst = grad_src.data.data() + (static_cast<std::size_t>(c) * grad_src.h + y / 2) * grad_src.w;
      for (int x = 0; x < g.w; ++x) dst[x / 2] += src[x];
    }
  }
}

Activation concat(const Activation& a, const Activation& b) {
  Activation out = make_act(a.c + b.c, a.h, a.w);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return out;
}

/// Group normalization of `y` into `out` with per-channel affine terms.
void group_norm(const Activation& y, int groups, const float* gamma, const float* beta, Activation& out,
                std::vector<float>& inv_std) {
  const int cg = y.c / groups;
  const std::size_t plane = static_cast<std::size_t>(y.h) * y.w;
  const std::size_t count = plane * cg;
  inv_std.assign(groups, 0.0f);
  for (int g = 0; g < groups; ++g) {
    const float* src = y.data.data() + g * count;
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum += src[i];
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (std::size_t i = 0; i < count; ++i) sq += (src[i] - mean) * (src[i] - mean);
    const double is = 1.0 / std::sqrt(sq / static_cast<double>(count) + kNormEps);
    inv_std[g] = static_cast<float>(is);
    for (int k = 0; k < cg; ++k) {
      const int c = g * cg + k;
      const float* s = src + k * plane;
      float* d = out.data.data() + c * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        d[i] = static_cast<float>(gamma[c] * ((s[i] - mean) * is) + beta[c]);
      }
    }
  }
}

/// Backward of group_norm given the normalized, pre-affine values `xhat`.
/// The gradient w.r.t. the output is in gz and is overwritten with the
/// gradient w.r.t. the input.
void group_norm_backward(const Activation& xhat, int groups, const float* gamma, const std::vector<float>& inv_std,
                         Activation& gz, float* grad_gamma, float* grad_beta) {
  const int cg = xhat.c / groups;
  const std::size_t plane = static_cast<std::size_t>(xhat.h) * xhat.w;
  const double count = static_cast<double>(plane) * cg;
  for (int g = 0; g < groups; ++g) {
    double sum_gx = 0.0, sum_gx_xhat = 0.0;
    for (int k = 0; k < cg; ++k) {
      const int c = g * cg + k;
      const float* x = xhat.data.data() + c * plane;
      const float* d = gz.data.data() + c * plane;
      double gg = 0.0, gb = 0.0;
      for (std::size_t i = 0; i < plane; ++i) {
        gg += static_cast<double>(d[i]) * x[i];
        gb += d[i];
      }
      grad_gamma[c] += static_cast<float>(gg);
      grad_beta[c] += static_cast<float>(gb);
      sum_gx += gamma[c] * gb;
      sum_gx_xhat += gamma[c] * gg;
    }
    const double is = inv_std[g];
    for (int k = 0; k < cg; ++k) {
      const int c = g * cg + k;
      const float* x = xhat.data.data() + c * plane;
      float* d = gz.data.data() + c * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        d[i] = static_cast<float>(is * (gamma[c] * d[i] - (sum_gx + x[i] * sum_gx_xhat) / count));
      }
    }
  }
}

}  // namespace

// Node order: input, encoder stages 0..n-1, bottleneck, decoder stages for
// skip levels n-2 down to 1, refine, head.
LineModel::LineModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const auto& e = config_.encoder;
  const int n = static_cast<int>(e.size());
  Rng rng(seed);
  const double prior_bias = std::log(config_.class_prior / (1.0 - config_.class_prior));

  nodes_.push_back(Node{});
  auto add_param = [&](const std::string& name, std::vector<int> shape, float fill) {
    std::size_t size = 1;
    for (int d : shape) size *= static_cast<std::size_t>(d);
    params_.push_back({name, std::move(shape), std::vector<float>(size, fill), std::vector<float>(size, 0.0f)});
    return static_cast<int>(params_.size()) - 1;
  };
  auto conv = [&](const std::string& name, int src, int out_c, int kernel, int stride, bool hidden) {
    Node nd;
    nd.op = Op::kConv;
    nd.a = src;
    nd.in_c = nodes_[src].op == Op::kInput ? 3 : nodes_[src].out_c;
    nd.out_c = out_c;
    nd.kernel = kernel;
    nd.stride = stride;
    nd.relu = hidden;
    nd.groups = hidden && config_.norm_groups > 0 ? std::gcd(config_.norm_groups, out_c) : 0;
    const int fan_in = nd.in_c * kernel * kernel;
    nd.weight = add_param(name + ".weight", {out_c, nd.in_c, kernel, kernel}, 0.0f);
    // He initialization for ReLU layers, unit gain for the linear head.
    const double stddev = std::sqrt((hidden ? 2.0 : 1.0) / fan_in);
    for (auto& v : params_[nd.weight].value) v = static_cast<float>(rng.normal(0.0, stddev));
    if (nd.groups > 0) {
      nd.gamma = add_param(name + ".gamma", {out_c}, 1.0f);
      nd.beta = add_param(name + ".beta", {out_c}, 0.0f);
    } else {
      nd.bias = add_param(name + ".bias", {out_c}, 0.0f);
      if (!hidden) {
        for (int c = 0; c < out_c; ++c) {
          if (ChannelLayout::is_classification(c)) params_[nd.bias].value[c] = static_cast<float>(prior_bias);
        }
      }
    }
    nodes_.push_back(nd);
    return static_cast<int>(nodes_.size()) - 1;
  };
  auto stage = [&](const std::string& name, int src, int out_c, int stride) {
    int x = conv(name + (config_.stage_convs > 1 ? "a" : ""), src, out_c, 3, stride, true);
    for (int k = 1; k < config_.stage_convs; ++k) {
      x = conv(name + static_cast<char>('a' + k), x, out_c, 3, 1, true);
    }
    return x;
  };

  std::vector<int> enc(n);
  int x = 0;
  for (int i = 0; i < n; ++i) x = enc[i] = stage("enc" + std::to_string(i), x, e[i], 2);
  x = conv("bottleneck", x, config_.bottleneck, 3, 1, true);
  for (int j = n - 2; j >= 1; --j) {
    Node up;
    up.op = Op::kUpsample;
    up.a = x;
    up.b = enc[j];
    up.out_c = nodes_[x].out_c;
    nodes_.push_back(up);
    Node cat;
    cat.op = Op::kConcat;
    cat.a = static_cast<int>(nodes_.size()) - 1;
    cat.b = enc[j];
    cat.out_c = up.out_c + e[j];
    nodes_.push_back(cat);
    x = conv("dec" + std::to_string(j), static_cast<int>(nodes_.size()) - 1, j == 1 ? config_.head : e[j], 3, 1,
             true);
  }
  x = conv("refine", x, config_.head, 3, 1, true);
  conv("head", x, ChannelLayout::kNumChannels, 1, 1, false);
}

std::size_t LineModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::vector<LineModel::Size> LineModel::node_sizes(int h, int w) const {
  std::vector<Size> sizes(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& nd = nodes_[i];
    switch (nd.op) {
      case Op::kInput:
        sizes[i] = {3, h, w};
        break;
      case Op::kConv: {
        const Size& in = sizes[nd.a];
        const ConvShape s{nd.in_c, in.h, in.w, nd.out_c, nd.kernel, nd.stride, nd.kernel / 2};
        sizes[i] = {nd.out_c, s.out_h(), s.out_w()};
        break;
      }
      case Op::kUpsample:
        sizes[i] = {nd.out_c, sizes[nd.b].h, sizes[nd.b].w};
        break;
      case Op::kConcat:
        sizes[i] = {nd.out_c, sizes[nd.a].h, sizes[nd.a].w};
        break;
    }
  }
  return sizes;
}

FeatureMaps LineModel::forward(const Image& image, Cache* cache) const {
  if (image.channels() != 3) throw ShapeError("model input must have 3 channels, got " + image.shape_string());
  if (image.height() <= 0 || image.width() <= 0 || image.height() % ModelConfig::kDownsample != 0 ||
      image.width() % ModelConfig::kDownsample != 0) {
    throw ShapeError("model input size must be a positive multiple of 4, got " + image.shape_string());
  }
  const std::size_t count = nodes_.size();
  Cache local;
  Cache& c = cache ? *cache : local;
  c.outputs.assign(count, {});
  c.pre_norm.assign(count, {});
  c.inv_std.assign(count, {});

  Activation& x = c.outputs[0] = make_act(3, image.height(), image.width());
  for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = image.values()[i] - 0.5f;
  for (std::size_t i = 1; i < count; ++i) {
    const Node& nd = nodes_[i];
    const Activation& a = c.outputs[nd.a];
    if (nd.op == Op::kUpsample) {
      c.outputs[i] = upsample(a, c.outputs[nd.b].h, c.outputs[nd.b].w);
      continue;
    }
    if (nd.op == Op::kConcat) {
      c.outputs[i] = concat(a, c.outputs[nd.b]);
      continue;
    }
    const ConvShape s{nd.in_c, a.h, a.w, nd.out_c, nd.kernel, nd.stride, nd.kernel / 2};
    Activation y = make_act(nd.out_c, s.out_h(), s.out_w());
    kernels::conv2d_forward(s, a.data.data(), params_[nd.weight].value.data(),
                            nd.bias >= 0 ? params_[nd.bias].value.data() : nullptr, y.data.data());
    if (nd.groups > 0) {
      Activation z = make_act(y.c, y.h, y.w);
      group_norm(y, nd.groups, params_[nd.gamma].value.data(), params_[nd.beta].value.data(), z, c.inv_std[i]);
      if (cache) c.pre_norm[i] = std::move(y);
      y = std::move(z);
    }
    if (nd.relu) {
      for (auto& v : y.data) v = std::max(v, 0.0f);
    }
    c.outputs[i] = std::move(y);
  }

  const Activation& out = c.outputs.back();
  FeatureMaps maps(out.c, out.h, out.w);
  for (std::size_t i = 0; i < out.data.size(); ++i) maps.values()[i] = out.data[i];
  return maps;
}

void LineModel::backward(const Cache& cache, const FeatureMaps& grad) {
  const std::size_t count = nodes_.size();
  if (cache.outputs.size() != count) throw Error("LineModel::backward: forward cache is empty");
  const Activation& top = cache.outputs.back();
  if (grad.channels() != top.c || grad.height() != top.h || grad.width() != top.w) {
    throw ShapeError("LineModel::backward: gradient shape " + grad.shape_string() + " does not match the output");
  }
  std::vector<Activation> g(count);  // gradient w.r.t. each node output, accumulated over consumers
  auto grad_of = [&](int i) -> Activation& {
    if (g[i].data.empty()) {
      const auto& o = cache.outputs[i];
      g[i] = make_act(o.c, o.h, o.w);
    }
    return g[i];
  };
  Activation& gt = grad_of(static_cast<int>(count) - 1);
  for (std::size_t i = 0; i < top.data.size(); ++i) gt.data[i] = static_cast<float>(grad.values()[i]);

  for (int i = static_cast<int>(count) - 1; i >= 1; --i) {
    if (g[i].data.empty()) continue;
    const Node& nd = nodes_[i];
    Activation& go = g[i];
    if (nd.op == Op::kUpsample) {
      upsample_backward(go, grad_of(nd.a));
    } else if (nd.op == Op::kConcat) {
      Activation& ga = grad_of(nd.a);
      Activation& gb = grad_of(nd.b);
      for (std::size_t k = 0; k < ga.data.size(); ++k) ga.data[k] += go.data[k];
      for (std::size_t k = 0; k < gb.data.size(); ++k) gb.data[k] += go.data[ga.data.size() + k];
    } else {
      const auto& out = cache.outputs[i].data;
      if (nd.relu) {
        for (std::size_t k = 0; k < go.data.size(); ++k) {
          if (out[k] <= 0.0f) go.data[k] = 0.0f;
        }
      }
      if (nd.groups > 0) {
        const auto& y = cache.pre_norm[i].data;
        const std::size_t plane = static_cast<std::size_t>(go.h) * go.w;
        const std::size_t group_size = plane * static_cast<std::size_t>(nd.out_c / nd.groups);
        Activation xhat = make_act(go.c, go.h, go.w);
        for (int gi = 0; gi < nd.groups; ++gi) {
          double sum = 0.0;
          for (std::size_t k = gi * group_size; k < (gi + 1) * group_size; ++k) sum += y[k];
          const double m = sum / static_cast<double>(group_size);
          const double is = cache.inv_std[i][gi];
          for (std::size_t k = gi * group_size; k < (gi + 1) * group_size; ++k) {
            xhat.data[k] = static_cast<float>((y[k] - m) * is);
          }
        }
        group_norm_backward(xhat, nd.groups, params_[nd.gamma].value.data(), cache.inv_std[i], go,
                            params_[nd.gamma].grad.data(), params_[nd.beta].grad.data());
      }
      const Activation& in = cache.outputs[nd.a];
      const ConvShape s{nd.in_c, in.h, in.w, nd.out_c, nd.kernel, nd.stride, nd.kernel / 2};
      Activation gi;
      if (nd.a != 0) gi = make_act(in.c, in.h, in.w);
      kernels::conv2d_backward(s, in.data.data(), params_[nd.weight].value.data(), go.data.data(),
                               nd.a != 0 ? gi.data.data() : nullptr, params_[nd.weight].grad.data(),
                               nd.bias >= 0 ? params_[nd.bias].grad.data() : nullptr);
      if (nd.a != 0) {
        Activation& ga = grad_of(nd.a);
        for (std::size_t k = 0; k < ga.data.size(); ++k) ga.data[k] += gi.data[k];
      }
    }
    go = Activation{};  // release
  }
}

void LineModel::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0f);
}

long long LineModel::forward_macs() const {
  const auto sizes = node_sizes(config_.input_size, config_.input_size);
  long long total = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& nd = nodes_[i];
    if (nd.op != Op::kConv) continue;
    total += ConvShape{nd.in_c, sizes[nd.a].h, sizes[nd.a].w, nd.out_c, nd.kernel, nd.stride, nd.kernel / 2}.macs();
  }
  return total;
}

LineModel build_model(const ModelConfig& config, std::uint64_t seed) { return LineModel(config, seed); }

Adam::Adam(const std::vector<Parameter>& params, const AdamConfig& config) : config_(config) {
  for (const auto& p : params) {
    m_.emplace_back(p.value.size(), 0.0f);
    v_.emplace_back(p.value.size(), 0.0f);
  }
}

void Adam::step(std::vector<Parameter>& params) {
  if (params.size() != m_.size()) throw Error("Adam::step: parameter list does not match the optimizer state");
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i] + config_.weight_decay * p.value[i];
      const double mi = b1 * m[i] + (1.0 - b1) * g;
      const double vi = b2 * v[i] + (1.0 - b2) * g * g;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double update = config_.lr * (mi / c1) / (std::sqrt(vi / c2) + config_.eps);
      p.value[i] = static_cast<float>(p.value[i] - update);
    }
  }
}

}  // namespace sslines
