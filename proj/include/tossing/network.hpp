#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "tossing/errors.hpp"
#include "tossing/random.hpp"

namespace tossing {

template <typename Scalar>
struct DenseLayer {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix weight;  // out x in
  Vector bias;

  int inputs() const { return static_cast<int>(weight.cols()); }
  int outputs() const { return static_cast<int>(weight.rows()); }
};

/// Fully connected ReLU network whose output is split into one head per
/// action factor. The value of a factor's choice is read from its head only.
template <typename Scalar>
class FactorizedQNet {
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Layers = std::vector<DenseLayer<Scalar>>;

  FactorizedQNet(int input_dim, std::vector<int> hidden, std::vector<int> head_widths)
      : head_widths_(std::move(head_widths)) {
    if (input_dim < 1 || head_widths_.empty()) throw InvalidInput("network needs inputs and heads");
    for (int w : head_widths_) {
      if (w < 1) throw InvalidInput("head widths must be positive");
    }
    int in = input_dim;
    for (int h : hidden) {
      if (h < 1) throw InvalidInput("hidden widths must be positive");
      layers_.push_back({Matrix::Zero(h, in), Vector::Zero(h)});
      in = h;
    }
    layers_.push_back({Matrix::Zero(output_dim(), in), Vector::Zero(output_dim())});
    build_offsets();
  }

  FactorizedQNet(Layers layers, std::vector<int> head_widths)
      : layers_(std::move(layers)), head_widths_(std::move(head_widths)) {
    if (layers_.empty()) throw InvalidInput("network needs at least one layer");
    for (std::size_t i = 1; i < layers_.size(); ++i) {
      if (layers_[i].inputs() != layers_[i - 1].outputs()) {
        throw InvalidInput("layer dimensions do not chain");
      }
    }
    if (layers_.back().outputs() != output_dim()) {
      throw InvalidInput("output layer width differs from the sum of head widths");
    }
    build_offsets();
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void init_uniform(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& layer : layers_) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(layer.inputs()));
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
          layer.weight(r, c) = static_cast<Scalar>(uniform(rng, -bound, bound));
        }
      }
      for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
        layer.bias(r) = static_cast<Scalar>(uniform(rng, -bound, bound));
      }
    }
  }

  void init_zero() {
    for (auto& layer : layers_) {
      layer.weight.setZero();
      layer.bias.setZero();
    }
  }

  int input_dim() const { return layers_.front().inputs(); }
  int output_dim() const {
    return std::accumulate(head_widths_.begin(), head_widths_.end(), 0);
  }
  const std::vector<int>& head_widths() const { return head_widths_; }
  int head_offset(std::size_t head) const { return offsets_[head]; }
  std::size_t head_count() const { return head_widths_.size(); }

  Layers& layers() { return layers_; }
  const Layers& layers() const { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  /// Columns of `x` are samples.
  Matrix forward(const Matrix& x) const {
    Matrix a = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Matrix z = (layers_[i].weight * a).colwise() + layers_[i].bias;
      a = (i + 1 < layers_.size()) ? Matrix(z.cwiseMax(Scalar(0))) : z;
    }
    return a;
  }

  Vector forward(const Vector& x) const { return forward(Matrix(x)).col(0); }

  /// Mean over samples and heads of (Q_head[action] - target)^2. `actions`
  /// holds head_count() indices per sample, sample-major. Fills `grad` with
  /// the parameter gradient when given.
  Scalar loss(const Matrix& x, std::span<const int> actions, const Vector& targets,
              Layers* grad = nullptr) const {
    const Eigen::Index batch = x.cols();
    const std::size_t heads = head_count();
    if (targets.size() != batch || actions.size() != static_cast<std::size_t>(batch) * heads) {
      throw InvalidInput("batch shapes disagree");
    }

    std::vector<Matrix> pre;  // pre-activations per layer
    std::vector<Matrix> act;  // inputs to each layer
    act.push_back(x);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Matrix z = (layers_[i].weight * act.back()).colwise() + layers_[i].bias;
      if (i + 1 < layers_.size()) act.push_back(z.cwiseMax(Scalar(0)));
      pre.push_back(std::move(z));
    }
    const Matrix& out = pre.back();

    const Scalar scale = Scalar(1) / static_cast<Scalar>(batch * static_cast<Eigen::Index>(heads));
    Scalar total = 0;
    Matrix delta = Matrix::Zero(out.rows(), batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
      for (std::size_t h = 0; h < heads; ++h) {
        const int a = actions[static_cast<std::size_t>(b) * heads + h];
        if (a < 0 || a >= head_widths_[h]) throw InvalidInput("action index outside its head");
        const Eigen::Index row = offsets_[h] + a;
        const Scalar err = out(row, b) - targets(b);
        total += err * err;
        delta(row, b) = Scalar(2) * scale * err;
      }
    }
    if (!grad) return total * scale;

    grad->resize(layers_.size());
    for (std::size_t i = layers_.size(); i-- > 0;) {
      (*grad)[i].weight = delta * act[i].transpose();
      (*grad)[i].bias = delta.rowwise().sum();
      if (i == 0) break;
      delta = (layers_[i].weight.transpose() * delta)
                  .cwiseProduct(pre[i - 1].unaryExpr([](Scalar v) { return v > 0 ? Scalar(1) : Scalar(0); }));
    }
    return total * scale;
  }

  void sgd_step(const Layers& grad, Scalar learning_rate) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      layers_[i].weight -= learning_rate * grad[i].weight;
      layers_[i].bias -= learning_rate * grad[i].bias;
    }
  }

private:
  void build_offsets() {
    offsets_.assign(head_widths_.size(), 0);
    for (std::size_t h = 1; h < head_widths_.size(); ++h) {
      offsets_[h] = offsets_[h - 1] + head_widths_[h - 1];
    }
  }

  Layers layers_;
  std::vector<int> head_widths_;
  std::vector<int> offsets_;
};

}  // namespace tossing
