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

#include "fanetids/nn.hpp"

#include <algorithm>
#include <cfloat>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fanetids {
namespace {

constexpr double kProbClamp = 1e-7;

using ConstMap = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;

struct DenseLayer {
  int in = 0;
  int out = 0;
  Eigen::Index w = 0;  // offset of the out x in weight block
  Eigen::Index b = 0;  // offset of the biases
};

struct Layout {
  Eigen::Index conv_w = 0;
  Eigen::Index conv_b = 0;
  std::vector<DenseLayer> dense;
  Eigen::Index total = 0;
};

Layout layout_of(const ArchSpec& arch) {
  Layout l;
  Eigen::Index off = 0;
  if (arch.kind == ArchKind::kCnn) {
    l.conv_w = off;
    off += static_cast<Eigen::Index>(arch.conv->filters) * arch.conv->kernel;
    l.conv_b = off;
    off += arch.conv->filters;
  }
  int in = arch.dense_input();
  std::vector<int> sizes = arch.hidden_sizes;
  sizes.push_back(arch.output_dim);
  for (int out : sizes) {
    DenseLayer d{in, out, off, off + static_cast<Eigen::Index>(in) * out};
    l.dense.push_back(d);
    off = d.b + out;
    in = out;
  }
  l.total = off;
  return l;
}

double sigmoid(double z) {
  const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  // Keep the probability strictly inside (0, 1) even where it rounds.
  return std::clamp(p, DBL_MIN, std::nextafter(1.0, 0.0));
}

// Intermediate values of one forward pass, kept for backpropagation.
struct Pass {
  RowMatrix conv;                   // pre-activation, B x (filters * conv_length)
  RowMatrix pooled;                 // relu + max-pool, B x (filters * pooled_length)
  std::vector<Eigen::Index> arg;    // argmax column in `conv` per pooled cell
  RowMatrix mask;                   // inverted-dropout multipliers, empty when off
  std::vector<RowMatrix> a;         // a[0] dense input, a[i + 1] output of dense layer i
};

void check_input(const ArchSpec& arch, const RowMatrix& x) {
  if (x.cols() != arch.input_dim) throw std::invalid_argument("input width mismatch");
  if (!x.allFinite()) throw std::invalid_argument("non-finite input");
}

void run_forward(const ModelParams& p, const Layout& l, const RowMatrix& x, Rng* dropout, Pass& s) {
  const ArchSpec& arch = p.arch;
  const Eigen::VectorXd& w = p.weights;
  const Eigen::Index batch = x.rows();
  s.a.clear();
  if (arch.kind == ArchKind::kCnn) {
    const ConvSpec& c = *arch.conv;
    const int len = arch.conv_length();
    const int plen = arch.pooled_length();
    s.conv.resize(batch, static_cast<Eigen::Index>(c.filters) * len);
    for (int f = 0; f < c.filters; ++f) {
      auto block = s.conv.middleCols(static_cast<Eigen::Index>(f) * len, len);
      block.setConstant(w[l.conv_b + f]);
      for (int k = 0; k < c.kernel; ++k) {
        block += w[l.conv_w + f * c.kernel + k] * x.middleCols(k, len);
      }
    }
    s.pooled.resize(batch, static_cast<Eigen::Index>(c.filters) * plen);
    s.arg.assign(static_cast<std::size_t>(batch * c.filters * plen), 0);
    for (Eigen::Index b = 0; b < batch; ++b) {
      for (int f = 0; f < c.filters; ++f) {
        for (int q = 0; q < plen; ++q) {
          const Eigen::Index base = static_cast<Eigen::Index>(f) * len + q * c.pool;
          Eigen::Index best_col = base;
          for (int j = 1; j < c.pool; ++j) {
            const Eigen::Index col = base + j;
            if (s.conv(b, col) > s.conv(b, best_col)) best_col = col;
          }
          const Eigen::Index cell = static_cast<Eigen::Index>(f) * plen + q;
          s.pooled(b, cell) = std::max(0.0, s.conv(b, best_col));
          s.arg[b * s.pooled.cols() + cell] = best_col;
        }
      }
    }
    if (dropout != nullptr && c.dropout > 0.0) {
      // One engine draw seeds a counter-based stream for the whole mask.
      const std::uint64_t base = (*dropout)();
      const double scale = 1.0 / (1.0 - c.dropout);
      s.mask.resize(batch, s.pooled.cols());
      double* m = s.mask.data();
      for (Eigen::Index i = 0; i < s.mask.size(); ++i) {
        const double u = static_cast<double>(splitmix64(base + static_cast<std::uint64_t>(i)) >> 11) * 0x1.0p-53;
        m[i] = u < c.dropout ? 0.0 : scale;
      }
      s.a.push_back(s.pooled.cwiseProduct(s.mask));
    } else {
      s.mask.resize(0, 0);
      s.a.push_back(s.pooled);
    }
  } else {
    s.a.push_back(x);
  }
  for (std::size_t i = 0; i < l.dense.size(); ++i) {
    const DenseLayer& d = l.dense[i];
    ConstMap wm(w.data() + d.w, d.out, d.in);
    RowMatrix z = s.a.back() * wm.transpose();
    z.rowwise() += w.segment(d.b, d.out).transpose();
    if (i + 1 == l.dense.size()) {
      z = z.unaryExpr([](double v) { return sigmoid(v); });
    } else {
      z = z.cwiseMax(0.0);
    }
    s.a.push_back(std::move(z));
  }
}

double bce(double p, double y) {
  const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (text.empty() || text == "-") return out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(std::stoi(part));
  return out;
}

}  // namespace

ArchSpec ArchSpec::dnn(std::vector<int> hidden) {
  ArchSpec a;
  a.kind = ArchKind::kDnn;
  a.hidden_sizes = std::move(hidden);
  return a;
}

ArchSpec ArchSpec::cnn(std::vector<int> hidden, ConvSpec conv) {
  ArchSpec a;
  a.kind = ArchKind::kCnn;
  a.hidden_sizes = std::move(hidden);
  a.conv = conv;
  return a;
}

void ArchSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be positive");
  if (output_dim != 1) throw std::invalid_argument("binary classifiers have one output");
  for (int h : hidden_sizes) {
    if (h < 1) throw std::invalid_argument("hidden sizes must be positive");
  }
  if (kind == ArchKind::kDnn) {
    if (conv) throw std::invalid_argument("a DNN has no convolution block");
    return;
  }
  if (!conv) throw std::invalid_argument("a CNN needs a convolution block");
  if (conv->filters < 1 || conv->kernel < 1 || conv->kernel > input_dim || conv->pool < 1) {
    throw std::invalid_argument("bad convolution shape");
  }
  if (pooled_length() < 1) throw std::invalid_argument("pooling leaves nothing");
  if (!(conv->dropout >= 0.0 && conv->dropout < 1.0)) {
    throw std::invalid_argument("dropout must be in [0, 1)");
  }
}

int ArchSpec::conv_length() const { return conv ? input_dim - conv->kernel + 1 : input_dim; }
int ArchSpec::pooled_length() const { return conv ? conv_length() / conv->pool : input_dim; }
int ArchSpec::dense_input() const { return conv ? conv->filters * pooled_length() : input_dim; }

std::string ArchSpec::descriptor() const {
  std::string hidden = "-";
  for (std::size_t i = 0; i < hidden_sizes.size(); ++i) {
    hidden = (i == 0 ? "" : hidden + ",") + std::to_string(hidden_sizes[i]);
  }
  std::string d = kind == ArchKind::kCnn ? "cnn" : "dnn";
  d += " in=" + std::to_string(input_dim) + " hidden=" + hidden;
  if (conv) {
    d += " conv=" + std::to_string(conv->filters) + "x" + std::to_string(conv->kernel) +
         " pool=" + std::to_string(conv->pool) + " dropout=" + format_exact(conv->dropout);
  }
  return d + " out=" + std::to_string(output_dim);
}

ArchSpec ArchSpec::parse(const std::string& descriptor) {
  std::istringstream in(descriptor);
  std::string kind;
  in >> kind;
  ArchSpec a;
  if (kind == "dnn") {
    a.kind = ArchKind::kDnn;
  } else if (kind == "cnn") {
    a.kind = ArchKind::kCnn;
    a.conv = ConvSpec{};
  } else {
    throw std::invalid_argument("unknown architecture '" + kind + "'");
  }
  std::string tok;
  try {
    while (in >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("bad token " + tok);
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "in") {
        a.input_dim = std::stoi(val);
      } else if (key == "hidden") {
        a.hidden_sizes = parse_int_list(val);
      } else if (key == "out") {
        a.output_dim = std::stoi(val);
      } else if (a.conv && key == "conv") {
        const auto x = val.find('x');
        if (x == std::string::npos) throw std::invalid_argument("bad conv " + val);
        a.conv->filters = std::stoi(val.substr(0, x));
        a.conv->kernel = std::stoi(val.substr(x + 1));
      } else if (a.conv && key == "pool") {
        a.conv->pool = std::stoi(val);
      } else if (a.conv && key == "dropout") {
        a.conv->dropout = std::stod(val);
      } else {
        throw std::invalid_argument("unknown descriptor key " + key);
      }
    }
  } catch (const std::logic_error& e) {
    throw std::invalid_argument("bad architecture descriptor: " + std::string(e.what()));
  }
  a.validate();
  return a;
}

std::size_t parameter_count(const ArchSpec& arch) {
  return static_cast<std::size_t>(layout_of(arch).total);
}

ModelParams init_params(const ArchSpec& arch, std::uint64_t seed) {
  arch.validate();
  const Layout l = layout_of(arch);
  ModelParams p{arch, Eigen::VectorXd::Zero(l.total)};
  Rng rng(derive_seed(seed, Stream::kInit));
  auto fill = [&](Eigen::Index off, Eigen::Index n, double fan_in, double fan_out) {
    const double lim = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-lim, lim);
    for (Eigen::Index i = 0; i < n; ++i) p.weights[off + i] = u(rng);
  };
  if (arch.kind == ArchKind::kCnn) {
    const auto& c = *arch.conv;
    fill(l.conv_w, static_cast<Eigen::Index>(c.filters) * c.kernel, c.kernel,
         static_cast<double>(c.filters) * c.kernel);
  }
  for (const auto& d : l.dense) fill(d.w, static_cast<Eigen::Index>(d.in) * d.out, d.in, d.out);
  return p;
}

Eigen::VectorXd forward(const ModelParams& params, const RowMatrix& x, Mode mode, Rng* rng) {
  check_input(params.arch, x);
  const bool drop = mode == Mode::kTrain && params.arch.conv && params.arch.conv->dropout > 0.0;
  if (drop && rng == nullptr) throw std::invalid_argument("train mode needs a dropout stream");
  Pass s;
  run_forward(params, layout_of(params.arch), x, drop ? rng : nullptr, s);
  return s.a.back().col(0);
}

double forward(const ModelParams& params, const Eigen::VectorXd& x, Mode mode, Rng* rng) {
  RowMatrix row = x.transpose();
  return forward(params, row, mode, rng)[0];
}

LossGrad loss_and_grad(const ModelParams& params, const RowMatrix& x, const Eigen::VectorXd& y,
                       Rng* dropout_rng) {
  check_input(params.arch, x);
  if (x.rows() == 0 || y.size() != x.rows()) throw std::invalid_argument("bad batch");
  const Layout l = layout_of(params.arch);
  const Eigen::VectorXd& w = params.weights;
  Pass s;
  run_forward(params, l, x, dropout_rng, s);

  const Eigen::Index batch = x.rows();
  const auto p = s.a.back().col(0);
  LossGrad out;
  out.grad = Eigen::VectorXd::Zero(l.total);
  RowMatrix dz(batch, 1);
  for (Eigen::Index b = 0; b < batch; ++b) {
    out.loss += bce(p[b], y[b]);
    const bool clamped = p[b] < kProbClamp || p[b] > 1.0 - kProbClamp;
    dz(b, 0) = clamped ? 0.0 : (p[b] - y[b]) / static_cast<double>(batch);
  }
  out.loss /= static_cast<double>(batch);

  RowMatrix da;
  for (std::size_t i = l.dense.size(); i-- > 0;) {
    const DenseLayer& d = l.dense[i];
    Map(out.grad.data() + d.w, d.out, d.in) = dz.transpose() * s.a[i];
    out.grad.segment(d.b, d.out) = dz.colwise().sum().transpose();
    da = dz * ConstMap(w.data() + d.w, d.out, d.in);
    if (i > 0) dz = da.cwiseProduct((s.a[i].array() > 0.0).cast<double>().matrix());
  }
  if (params.arch.kind != ArchKind::kCnn) return out;

  const ConvSpec& c = *params.arch.conv;
  const int len = params.arch.conv_length();
  if (s.mask.size() > 0) da = da.cwiseProduct(s.mask);
  RowMatrix dconv = RowMatrix::Zero(batch, s.conv.cols());
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (Eigen::Index cell = 0; cell < s.pooled.cols(); ++cell) {
      const Eigen::Index col = s.arg[b * s.pooled.cols() + cell];
      if (s.conv(b, col) > 0.0) dconv(b, col) += da(b, cell);
    }
  }
  for (int f = 0; f < c.filters; ++f) {
    const auto block = dconv.middleCols(static_cast<Eigen::Index>(f) * len, len);
    for (int k = 0; k < c.kernel; ++k) {
      out.grad[l.conv_w + f * c.kernel + k] = block.cwiseProduct(x.middleCols(k, len)).sum();
    }
    out.grad[l.conv_b + f] = block.sum();
  }
  return out;
}

double proximal_penalty(const Eigen::VectorXd& w, const Proximal& prox) {
  if (prox.anchor == nullptr || prox.mu == 0.0) return 0.0;
  return 0.5 * prox.mu * (w - *prox.anchor).squaredNorm();
}

Eigen::VectorXd proximal_gradient(const Eigen::VectorXd& w, const Proximal& prox) {
  if (prox.anchor == nullptr || prox.mu == 0.0) return Eigen::VectorXd::Zero(w.size());
  return prox.mu * (w - *prox.anchor);
}

void sgd_step(Eigen::VectorXd& w, const Eigen::VectorXd& grad, double lr, const Proximal* prox) {
  if (prox != nullptr && prox->anchor != nullptr && prox->mu != 0.0) {
    const double k = lr * prox->mu;
    w = (w - lr * grad + k * *prox->anchor) / (1.0 + k);
  } else {
    w -= lr * grad;
  }
}

std::vector<Eigen::Index> epoch_order(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

void gather_batch(const LabeledData& data, const std::vector<Eigen::Index>& order,
                  Eigen::Index begin, Eigen::Index end, RowMatrix& x, Eigen::VectorXd& y) {
  x.resize(end - begin, data.x.cols());
  y.resize(end - begin);
  for (Eigen::Index i = begin; i < end; ++i) {
    x.row(i - begin) = data.x.row(order[i]);
    y[i - begin] = data.y[order[i]];
  }
}

ModelParams sgd_epoch(const ModelParams& params, const LabeledData& data, const TrainConfig& cfg,
                      const Proximal* prox) {
  if (data.size() == 0) throw std::invalid_argument("sgd_epoch on empty data");
  if (!(cfg.learning_rate >= 0.0) || cfg.batch_size < 1) {
    throw std::invalid_argument("bad training configuration");
  }
  ModelParams out = params;
  const auto order = epoch_order(data.size(), cfg.seed);
  RowMatrix x;
  Eigen::VectorXd y;
  std::uint64_t batch = 0;
  for (Eigen::Index begin = 0; begin < data.size(); begin += cfg.batch_size, ++batch) {
    const Eigen::Index end = std::min<Eigen::Index>(begin + cfg.batch_size, data.size());
    gather_batch(data, order, begin, end, x, y);
    Rng drop(derive_seed(cfg.seed, Stream::kDropout, batch));
    const LossGrad lg = loss_and_grad(out, x, y, &drop);
    sgd_step(out.weights, lg.grad, cfg.learning_rate, prox);
  }
  return out;
}

double mean_loss(const ModelParams& params, const LabeledData& data) {
  if (data.size() == 0) return 0.0;
  const Eigen::VectorXd p = forward(params, data.x, Mode::kEval);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) sum += bce(p[i], data.y[i]);
  return sum / static_cast<double>(p.size());
}

std::vector<int> predict_labels(const ModelParams& params, const RowMatrix& x, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold outside (0, 1)");
  std::vector<int> out;
  if (x.rows() == 0) return out;
  const Eigen::VectorXd p = forward(params, x, Mode::kEval);
  out.reserve(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out.push_back(p[i] >= threshold ? 1 : 0);
  return out;
}

void write_weights(std::ostream& out, const ModelParams& params) {
  out << "fanetids-weights v1 " << params.arch.descriptor() << '\n' << params.weights.size() << '\n';
  for (Eigen::Index i = 0; i < params.weights.size(); ++i) {
    out << format_exact(params.weights[i]) << '\n';
  }
}

void write_weights(const std::filesystem::path& path, const ModelParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_weights(out, params);
}

ModelParams read_weights(std::istream& in) {
  std::string line;
  const std::string magic = "fanetids-weights v1 ";
  if (!std::getline(in, line) || line.rfind(magic, 0) != 0) {
    throw std::runtime_error("not a weight file");
  }
  ModelParams p;
  p.arch = ArchSpec::parse(line.substr(magic.size()));
  if (!std::getline(in, line)) throw std::runtime_error("weight file: missing count");
  const auto count = static_cast<Eigen::Index>(std::stoll(line));
  if (count != static_cast<Eigen::Index>(parameter_count(p.arch))) {
    throw std::runtime_error("weight file: count does not match the architecture");
  }
  p.weights.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("weight file: truncated");
    double v = 0.0;
    auto r = std::from_chars(line.data(), line.data() + line.size(), v);
    if (r.ec != std::errc{} || r.ptr != line.data() + line.size() || !std::isfinite(v)) {
      throw std::runtime_error("weight file: bad value on line " + std::to_string(i + 3));
    }
    p.weights[i] = v;
  }
  return p;
}

ModelParams read_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_weights(in);
}

}  // namespace fanetids
