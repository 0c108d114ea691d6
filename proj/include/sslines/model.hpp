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

#ifndef SSLINES_MODEL_HPP_
#define SSLINES_MODEL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sslines/encoding.hpp"
#include "sslines/geometry.hpp"
#include "sslines/kernels.hpp"

namespace sslines {

/**
 * Small U-shaped encoder-decoder. n encoder stages (a stride-2 convolution
 * plus stage_convs - 1 stride-1 ones) take the input to 1/2^n scale, a
 * bottleneck convolution follows, and upsampling stages with skip connections
 * return to 1/4 scale, where a 3x3 convolution and a 1x1 head produce the 16
 * output maps. The depth sets the receptive field, which has to cover half of
 * the longest line.
 *
 * Hidden convolutions are followed by per-sample group normalization with
 * gcd(norm_groups, width) groups, or none when norm_groups is 0.
 */
struct ModelConfig {
  int input_size = 128;
  std::vector<int> encoder{16, 32, 48, 64, 96};
  int bottleneck = 96;
  int head = 32;
  int stage_convs = 1;
  int norm_groups = 4;
  double class_prior = 0.01;  // initial sigmoid output of the classification channels

  static constexpr int kDownsample = 4;

  static ModelConfig desk();
  static ModelConfig reference();
  void validate() const;
};

struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<float> value;
  std::vector<float> grad;
};

class LineModel {
 public:
  struct Activation {
    int c = 0, h = 0, w = 0;
    std::vector<float> data;
  };

  /// Per-node values recorded by forward() for backward().
  struct Cache {
    std::vector<Activation> outputs;
    std::vector<Activation> pre_norm;        // convolution output before normalization
    std::vector<std::vector<float>> inv_std;  // per group
  };

  LineModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::size_t parameter_count() const;

  /// 3 x H x W image in [0, 1] to 16 x H/4 x W/4 maps. H and W must be
  /// positive multiples of 4.
  FeatureMaps forward(const Image& image, Cache* cache = nullptr) const;

  /// Accumulates parameter gradients for d(loss)/d(output) = grad.
  void backward(const Cache& cache, const FeatureMaps& grad);

  void zero_grad();

  /// Multiply-accumulate count of one forward pass at the configured size.
  long long forward_macs() const;

 private:
  enum class Op { kInput, kConv, kUpsample, kConcat };

  struct Node {
    Op op = Op::kInput;
    int a = -1, b = -1;  // operand nodes; for upsampling, b gives the target size
    int in_c = 0, out_c = 0, kernel = 3, stride = 1;
    bool relu = false;
    int groups = 0;
    int weight = -1, bias = -1, gamma = -1, beta = -1;  // parameter indices
  };

  struct Size {
    int c, h, w;
  };
  std::vector<Size> node_sizes(int h, int w) const;

  ModelConfig config_;
  std::vector<Parameter> params_;
  std::vector<Node> nodes_;
};

LineModel build_model(const ModelConfig& config, std::uint64_t seed);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Adaptive-moment optimizer over a model's parameters.
class Adam {
 public:
  Adam() = default;
  Adam(const std::vector<Parameter>& params, const AdamConfig& config);

  void step(std::vector<Parameter>& params);
  void set_lr(double lr) { config_.lr = lr; }
  const AdamConfig& config() const { return config_; }

  long long steps() const { return t_; }
  std::vector<std::vector<float>>& first_moment() { return m_; }
  std::vector<std::vector<float>>& second_moment() { return v_; }
  void set_steps(long long t) { t_ = t; }

 private:
  AdamConfig config_;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
  long long t_ = 0;
};

}  // namespace sslines

#endif  // SSLINES_MODEL_HPP_
