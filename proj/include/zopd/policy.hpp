#pragma once

// Forward-only feedforward policy parameterizations phi(h, theta). There is
// deliberately no backpropagation anywhere: the learner only ever evaluates
// the forward pass. Parameters live in one flat vector (per layer: weights
// row-major, then biases; per-user replicas are laid out user block by user
// block) so a policy can be perturbed as a single Gaussian direction.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "zopd/random.hpp"
#include "zopd/vec.hpp"

namespace zopd {

enum class Activation { Rectifier, Sigmoid, Identity };

struct LayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  Activation activation = Activation::Identity;
};

inline double apply_activation(Activation a, double z) {
  switch (a) {
    case Activation::Rectifier:
      return z > 0.0 ? z : 0.0;  // exactly 0 at z == 0
    case Activation::Sigmoid:
      if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
      {
        const double e = std::exp(z);
        return e / (1.0 + e);
      }
    case Activation::Identity:
      return z;
  }
  return z;
}

class DnnPolicy {
 public:
  enum class Structure { PerUser, Joint };

  // PerUser: `layers` describes one single-input single-output replica that
  // is instantiated independently for each of the n_users fading inputs.
  // Joint: one network mapping the full fading vector to all allocations.
  DnnPolicy(std::vector<LayerSpec> layers, Structure structure, int n_users, double output_scale)
      : layers_(std::move(layers)),
        structure_(structure),
        n_users_(n_users),
        output_scale_(output_scale) {
    if (n_users_ <= 0) throw std::invalid_argument("DnnPolicy: n_users must be positive");
    if (!(output_scale_ > 0.0))
      throw std::invalid_argument("DnnPolicy: output_scale must be positive");
    for (const LayerSpec& l : layers_) {
      if (l.in_dim <= 0 || l.out_dim <= 0)
        throw std::invalid_argument("DnnPolicy: layer dimensions must be positive");
    }
    for (std::size_t k = 1; k < layers_.size(); ++k) {
      if (layers_[k].in_dim != layers_[k - 1].out_dim)
        throw std::invalid_argument("DnnPolicy: consecutive layer dimensions do not chain");
    }
    if (!layers_.empty()) {
      if (structure_ == Structure::PerUser) {
        if (layers_.front().in_dim != 1 || layers_.back().out_dim != 1)
          throw std::invalid_argument("DnnPolicy: per-user replicas must be single-input single-output");
      } else if (layers_.front().in_dim != n_users_) {
        throw std::invalid_argument("DnnPolicy: joint network input must match the fading dimension");
      }
    }
    per_net_dim_ = 0;
    for (const LayerSpec& l : layers_) per_net_dim_ += l.in_dim * l.out_dim + l.out_dim;
  }

  int theta_dim() const {
    return structure_ == Structure::PerUser ? n_users_ * per_net_dim_ : per_net_dim_;
  }

  int input_dim() const { return n_users_; }

  int output_dim() const {
    if (layers_.empty()) return n_users_;
    return structure_ == Structure::PerUser ? n_users_ : layers_.back().out_dim;
  }

  int n_users() const { return n_users_; }
  double output_scale() const { return output_scale_; }
  Structure structure() const { return structure_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  Vec forward(const Vec& h, const Vec& theta) const {
    if (static_cast<int>(h.size()) != n_users_)
      throw std::invalid_argument("DnnPolicy::forward: fading dimension mismatch");
    if (static_cast<int>(theta.size()) != theta_dim())
      throw std::invalid_argument("DnnPolicy::forward: parameter dimension mismatch");
    if (layers_.empty()) return h;
    if (structure_ == Structure::Joint) return forward_net(theta.data(), h);
    Vec out(static_cast<std::size_t>(n_users_));
    Vec in(1);
    for (int u = 0; u < n_users_; ++u) {
      in[0] = h[static_cast<std::size_t>(u)];
      out[static_cast<std::size_t>(u)] = forward_net(theta.data() + u * per_net_dim_, in)[0];
    }
    return out;
  }

  Vec zero_theta() const { return zeros(static_cast<std::size_t>(theta_dim())); }

  // Seeded uniform(-radius, radius) initialization, the configurable
  // alternative to the all-zero default.
  Vec uniform_theta(double radius, std::uint64_t seed) const {
    SplitMix64 rng(seed);
    Vec out(static_cast<std::size_t>(theta_dim()));
    for (double& v : out) v = rng.uniform(-radius, radius);
    return out;
  }

 private:
  // One replica's forward pass; `theta` points at its flat parameter block.
  Vec forward_net(const double* theta, const Vec& input) const {
    Vec cur = input;
    const double* block = theta;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const LayerSpec& l = layers_[k];
      const double* weights = block;               // row-major, out_dim x in_dim
      const double* biases = block + l.in_dim * l.out_dim;
      Vec next(static_cast<std::size_t>(l.out_dim));
      for (int r = 0; r < l.out_dim; ++r) {
        double z = biases[r];
        const double* row = weights + r * l.in_dim;
        for (int c = 0; c < l.in_dim; ++c) z += row[c] * cur[static_cast<std::size_t>(c)];
        double a = apply_activation(l.activation, z);
        if (k + 1 == layers_.size() && l.activation == Activation::Sigmoid) a *= output_scale_;
        next[static_cast<std::size_t>(r)] = a;
      }
      cur = std::move(next);
      block += l.in_dim * l.out_dim + l.out_dim;
    }
    return cur;
  }

  std::vector<LayerSpec> layers_;
  Structure structure_;
  int n_users_;
  double output_scale_;
  int per_net_dim_ = 0;
};

// Direct parameterization for analytic toys: p_i = clamp(theta_i, lo, hi),
// independent of the fading input.
class ClampPolicy {
 public:
  ClampPolicy(int n, double lo, double hi) : n_(n), lo_(lo), hi_(hi) {
    if (n <= 0) throw std::invalid_argument("ClampPolicy: dimension must be positive");
    if (!(lo <= hi)) throw std::invalid_argument("ClampPolicy: lo must be <= hi");
  }

  int theta_dim() const { return n_; }
  int output_dim() const { return n_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  Vec forward(const Vec& /*h*/, const Vec& theta) const {
    if (static_cast<int>(theta.size()) != n_)
      throw std::invalid_argument("ClampPolicy::forward: parameter dimension mismatch");
    Vec out(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
      out[i] = std::min(std::max(theta[i], lo_), hi_);
    return out;
  }

 private:
  int n_;
  double lo_;
  double hi_;
};

}  // namespace zopd
