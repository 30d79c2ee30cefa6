/*
 * Copyright 2026 The fanetids Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Binary classifiers trained from scratch: an MLP ("DNN") and a 1D
// convolutional net ("CNN"), SGD with binary cross-entropy.
//
// Samples are rows. All parameters live in one flat vector, layer by layer,
// each layer's weights (row-major, out x in) followed by its biases. For the
// CNN the first layer is the convolution: filters x kernel weights, then one
// bias per filter. The pooled feature map is flattened filter-major.

#ifndef FANETIDS_NN_HPP_
#define FANETIDS_NN_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fanetids/common.hpp"

namespace fanetids {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ArchKind { kDnn, kCnn };

struct ConvSpec {
  int filters = 22;
  int kernel = 3;
  int pool = 2;
  double dropout = 0.1;
  bool operator==(const ConvSpec&) const = default;
};

struct ArchSpec {
  ArchKind kind = ArchKind::kDnn;
  std::vector<int> hidden_sizes{16, 8};
  std::optional<ConvSpec> conv;
  int input_dim = 31;
  int output_dim = 1;

  static ArchSpec dnn(std::vector<int> hidden = {16, 8});
  static ArchSpec cnn(std::vector<int> hidden = {16, 8}, ConvSpec conv = {});

  bool operator==(const ArchSpec&) const = default;

  // Throws std::invalid_argument.
  void validate() const;
  int conv_length() const;    // input_dim - kernel + 1
  int pooled_length() const;  // conv_length / pool
  int dense_input() const;    // flattened width entering the first dense layer

  // One-line text form, e.g. "cnn in=31 hidden=16,8 conv=22x3 pool=2 dropout=0.1 out=1".
  std::string descriptor() const;
  static ArchSpec parse(const std::string& descriptor);
};

std::size_t parameter_count(const ArchSpec& arch);

struct ModelParams {
  ArchSpec arch;
  Eigen::VectorXd weights;

  bool operator==(const ModelParams& o) const {
    return arch == o.arch && weights.size() == o.weights.size() && weights == o.weights;
  }
};

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 32;
  int local_epochs = 1;
  std::uint64_t seed = 0;  // shuffle order and dropout masks for one epoch
};

struct LabeledData {
  RowMatrix x;        // n x input_dim
  Eigen::VectorXd y;  // 0 / 1
  Eigen::Index size() const { return x.rows(); }
};

enum class Mode { kTrain, kEval };

// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases.
ModelParams init_params(const ArchSpec& arch, std::uint64_t seed);

// Probability of the attack class for each row. Train mode applies inverted
// dropout with masks drawn from `rng` (required in train mode for the CNN).
Eigen::VectorXd forward(const ModelParams& params, const RowMatrix& x, Mode mode,
                        Rng* rng = nullptr);
double forward(const ModelParams& params, const Eigen::VectorXd& x, Mode mode, Rng* rng = nullptr);

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

// Mean binary cross-entropy and its exact gradient. The probability is
// clamped to [1e-7, 1 - 1e-7] inside the loss only; a clamped sample
// contributes no gradient. A null `dropout_rng` disables dropout.
LossGrad loss_and_grad(const ModelParams& params, const RowMatrix& x, const Eigen::VectorXd& y,
                       Rng* dropout_rng);

// Quadratic pull toward `anchor`: adds (mu / 2) * |w - anchor|^2 to the loss.
struct Proximal {
  const Eigen::VectorXd* anchor = nullptr;
  double mu = 0.0;
};
double proximal_penalty(const Eigen::VectorXd& w, const Proximal& prox);
Eigen::VectorXd proximal_gradient(const Eigen::VectorXd& w, const Proximal& prox);

// One SGD step on a mini-batch gradient. With a proximal term the penalty is
// taken implicitly, w <- (w - lr*g + lr*mu*anchor) / (1 + lr*mu), which is
// stable for any mu; mu == 0 is exactly the plain step.
void sgd_step(Eigen::VectorXd& w, const Eigen::VectorXd& grad, double lr,
              const Proximal* prox = nullptr);

// Shuffle order of one epoch over n rows.
std::vector<Eigen::Index> epoch_order(Eigen::Index n, std::uint64_t seed);
// Rows [begin, end) of `order` gathered into a batch.
void gather_batch(const LabeledData& data, const std::vector<Eigen::Index>& order,
                  Eigen::Index begin, Eigen::Index end, RowMatrix& x, Eigen::VectorXd& y);

// One pass over `data` in batches of cfg.batch_size (last partial batch
// kept), shuffled by cfg.seed.
ModelParams sgd_epoch(const ModelParams& params, const LabeledData& data, const TrainConfig& cfg,
                      const Proximal* prox = nullptr);

// Mean BCE over a data set in eval mode.
double mean_loss(const ModelParams& params, const LabeledData& data);

// 1 (attack) iff probability >= threshold.
std::vector<int> predict_labels(const ModelParams& params, const RowMatrix& x,
                                double threshold = 0.5);

// Line 1: "fanetids-weights v1 <descriptor>", line 2: parameter count, then
// one weight per line in shortest round-trip decimal form.
void write_weights(std::ostream& out, const ModelParams& params);
void write_weights(const std::filesystem::path& path, const ModelParams& params);
ModelParams read_weights(std::istream& in);
ModelParams read_weights(const std::filesystem::path& path);

}  // namespace fanetids

#endif  // FANETIDS_NN_HPP_
