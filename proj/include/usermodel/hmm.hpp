#pragma once

// Hidden Markov attention model, inferred with a bootstrap particle filter.
//
// Each particle hypothesizes a locus of attention (one value per visualized
// attribute) and a bias vector pi over the same attributes. An interaction x
// is emitted with likelihood
//
//   L(x | particle) = prod_a [ pi_a * k_a(x_a, attention_a) + (1 - pi_a) * u_a ]
//
// where k_a is a normalized Gaussian kernel (continuous) or a smoothed
// indicator (discrete) and u_a the uniform density over the attribute. The
// attention performs a random walk between interactions; pi is carried by
// the particles and diversified by roughening after each resampling step.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "usermodel/core.hpp"

namespace usermodel {

struct HmmConfig {
  std::size_t particles = 1000;
  double transition_scale = 0.05;  // sigma, fraction of the attribute range
  double stickiness = 0.95;        // rho, discrete attention stays put
  double bandwidth = 0.05;         // h, fraction of the attribute range
  double category_smoothing = 0.05;
  double ess_threshold = 0.5;      // resample when ESS < threshold * p
  double roughening = 0.02;        // std-dev of the pi jitter after resampling
  std::uint64_t seed = 0;
};

struct Particle {
  std::vector<double> attention;  // per visualized attribute
  std::vector<double> bias;       // pi, per visualized attribute
  double weight = 0.0;
};

class HiddenMarkovModel final : public Model {
 public:
  HiddenMarkovModel(const Dataset& data, HmmConfig config) : data_(&data), config_(config), rng_(config.seed) {
    for (std::size_t j = 0; j < data.dims(); ++j) {
      if (data.attribute(j).visualized) channels_.push_back(j);
    }
    if (channels_.empty()) throw Error(ErrorKind::NoVisualizedAttributes, "hmm needs a visualized attribute");
    if (config_.particles < 1) throw Error(ErrorKind::Config, "hmm.particles must be >= 1");
    if (!(config_.stickiness > 0 && config_.stickiness < 1)) {
      throw Error(ErrorKind::Config, "hmm.stickiness must lie in (0,1)");
    }
    if (!(config_.bandwidth > 0) || !(config_.transition_scale >= 0) || !(config_.roughening >= 0)) {
      throw Error(ErrorKind::Config, "hmm bandwidth must be > 0, scales >= 0");
    }
    if (!(config_.category_smoothing > 0 && config_.category_smoothing < 1)) {
      throw Error(ErrorKind::Config, "hmm.category_smoothing must lie in (0,1)");
    }

    for (auto j : channels_) {
      const auto& a = data.attribute(j);
      Channel ch;
      ch.attribute = j;
      ch.discrete = a.discrete();
      if (ch.discrete) {
        ch.categories = a.categories.size();
        ch.uniform = 1.0 / static_cast<double>(ch.categories);
        ch.match = ch.categories > 1 ? 1.0 - config_.category_smoothing : 1.0;
        ch.mismatch = ch.categories > 1 ? config_.category_smoothing / static_cast<double>(ch.categories - 1) : 0.0;
      } else {
        const double r = data.range(j);
        ch.degenerate = !(r > 0);
        ch.uniform = ch.degenerate ? 1.0 : 1.0 / r;
        ch.kernel_width = config_.bandwidth * r;
        ch.step = config_.transition_scale * r;
      }
      layout_.push_back(ch);
    }

    const std::size_t v = channels_.size();
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::gamma_distribution<double> unit_gamma(1.0, 1.0);
    particles_.resize(config_.particles);
    for (auto& p : particles_) {
      const auto src = pick(rng_);
      p.attention.resize(v);
      p.bias.resize(v);
      double total = 0.0;
      for (std::size_t c = 0; c < v; ++c) {
        p.attention[c] = data.value(src, channels_[c]);
        p.bias[c] = unit_gamma(rng_);
        total += p.bias[c];
      }
      // Symmetric Dirichlet(1) draw; the clamp guards the [0,1] invariant.
      for (auto& b : p.bias) b = std::clamp(b / total, 0.0, 1.0);
      p.weight = 1.0 / static_cast<double>(config_.particles);
    }
    last_ess_ = static_cast<double>(config_.particles);

    columns_.resize(layout_.size());
    for (std::size_t c = 0; c < layout_.size(); ++c) {
      columns_[c].resize(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) columns_[c][i] = data.value(i, layout_[c].attribute);
    }
  }

  std::string name() const override { return "hmm"; }
  Capabilities capabilities() const override { return {true, true}; }

  void observe(const InteractionEvent& event) override {
    if (event.point >= data_->size()) throw Error(ErrorKind::UnknownPoint, event.point_id);
    transition();

    const auto x = data_->row(event.point);
    std::vector<double> logw(particles_.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < particles_.size(); ++i) {
      logw[i] = std::log(particles_[i].weight) + std::log(likelihood(x, particles_[i]));
      top = std::max(top, logw[i]);
    }
    if (!std::isfinite(top)) {
      for (auto& p : particles_) p.weight = 1.0 / static_cast<double>(particles_.size());
    } else {
      double total = 0.0;
      for (std::size_t i = 0; i < particles_.size(); ++i) {
        particles_[i].weight = std::exp(logw[i] - top);
        total += particles_[i].weight;
      }
      for (auto& p : particles_) p.weight /= total;
    }

    last_ess_ = effective_sample_size();
    if (last_ess_ < config_.ess_threshold * static_cast<double>(particles_.size())) {
      resample();
      ++resample_count_;
    }
    ++observations_;
  }

  /// Mixture of the particles' emission densities, min-max rescaled.
  RankScores rank_all() const override {
    if (observations_ == 0) throw Error(ErrorKind::NotObserved, "hmm has not observed an interaction");
    const std::size_t n = data_->size();
    std::vector<double> score(n, 0.0);
    std::vector<double> term(n);
    std::vector<double> table;
    for (const auto& p : particles_) {
      if (p.weight <= 0.0) continue;
      std::fill(term.begin(), term.end(), p.weight);
      for (std::size_t c = 0; c < layout_.size(); ++c) {
        const auto& ch = layout_[c];
        const double pi = p.bias[c];
        const double base = (1.0 - pi) * ch.uniform;
        if (ch.discrete) {
          table.assign(ch.categories, pi * ch.mismatch + base);
          table[static_cast<std::size_t>(p.attention[c])] = pi * ch.match + base;
          const auto& col = columns_[c];
          for (std::size_t i = 0; i < n; ++i) term[i] *= table[static_cast<std::size_t>(col[i])];
        } else if (!ch.degenerate && pi > 0.0) {
          const double peak = pi * gaussian(0.0, ch.kernel_width);
          const double curv = -0.5 / (ch.kernel_width * ch.kernel_width);
          const double centre = p.attention[c];
          const auto& col = columns_[c];
          for (std::size_t i = 0; i < n; ++i) {
            const double delta = col[i] - centre;
            term[i] *= peak * std::exp(curv * delta * delta) + base;
          }
        } else if (!ch.degenerate) {
          for (auto& t : term) t *= base;
        }
      }
      for (std::size_t i = 0; i < n; ++i) score[i] += term[i];
    }
    return RankScores{rescale_unit(std::move(score))};
  }

  /// Weighted mean of pi per visualized attribute; others score 0.
  BiasScores bias_all() const override {
    if (observations_ == 0) throw Error(ErrorKind::NotObserved, "hmm has not observed an interaction");
    BiasScores b{attribute_names(*data_), std::vector<double>(data_->dims(), 0.0)};
    for (std::size_t c = 0; c < channels_.size(); ++c) {
      double s = 0.0;
      for (const auto& p : particles_) s += p.weight * p.bias[c];
      b.values[channels_[c]] = std::clamp(s, 0.0, 1.0);
    }
    return b;
  }

  /// Emission likelihood of point `x` (a full dataset row) under a particle.
  double likelihood(std::span<const double> x, const Particle& p) const {
    double l = 1.0;
    for (std::size_t c = 0; c < layout_.size(); ++c) {
      const auto& ch = layout_[c];
      const double pi = p.bias[c];
      const double xv = x[ch.attribute];
      double k;
      if (ch.discrete) {
        k = xv == p.attention[c] ? ch.match : ch.mismatch;
      } else if (ch.degenerate) {
        continue;
      } else {
        k = gaussian(xv - p.attention[c], ch.kernel_width);
      }
      l *= pi * k + (1.0 - pi) * ch.uniform;
    }
    return l;
  }

  double effective_sample_size() const {
    double s = 0.0;
    for (const auto& p : particles_) s += p.weight * p.weight;
    return 1.0 / s;
  }

  const std::vector<Particle>& particles() const noexcept { return particles_; }
  /// Replaces the particle set; weights are renormalized.
  void set_particles(std::vector<Particle> particles) {
    if (particles.empty()) throw Error(ErrorKind::InvalidArgument, "particle set is empty");
    double total = 0.0;
    for (auto& p : particles) {
      if (p.attention.size() != channels_.size() || p.bias.size() != channels_.size()) {
        throw Error(ErrorKind::InvalidArgument, "particle dimension does not match visualized attributes");
      }
      total += p.weight;
    }
    for (auto& p : particles) p.weight /= total;
    particles_ = std::move(particles);
  }
  const std::vector<std::size_t>& channels() const noexcept { return channels_; }
  double last_ess() const noexcept { return last_ess_; }
  std::size_t resample_count() const noexcept { return resample_count_; }
  std::size_t observations() const noexcept { return observations_; }

 private:
  struct Channel {
    std::size_t attribute = 0;
    bool discrete = false;
    bool degenerate = false;
    std::size_t categories = 0;
    double uniform = 1.0;
    double match = 1.0;
    double mismatch = 0.0;
    double kernel_width = 0.0;
    double step = 0.0;
  };

  static double gaussian(double delta, double width) {
    const double z = delta / width;
    return std::exp(-0.5 * z * z) / (width * std::sqrt(2.0 * std::numbers::pi));
  }

  void transition() {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& p : particles_) {
      for (std::size_t c = 0; c < layout_.size(); ++c) {
        const auto& ch = layout_[c];
        if (ch.discrete) {
          if (unit(rng_) >= config_.stickiness) {
            std::uniform_int_distribution<std::size_t> cat(0, ch.categories - 1);
            p.attention[c] = static_cast<double>(cat(rng_));
          }
        } else if (ch.step > 0) {
          p.attention[c] += ch.step * noise(rng_);
        }
      }
    }
  }

  /// Systematic resampling followed by roughening of pi.
  void resample() {
    const std::size_t np = particles_.size();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double step = 1.0 / static_cast<double>(np);
    double u = unit(rng_) * step;
    double cumulative = particles_[0].weight;
    std::size_t src = 0;
    std::vector<Particle> next;
    next.reserve(np);
    for (std::size_t i = 0; i < np; ++i) {
      while (u > cumulative && src + 1 < np) cumulative += particles_[++src].weight;
      next.push_back(particles_[src]);
      next.back().weight = step;
      u += step;
    }
    if (config_.roughening > 0) {
      std::normal_distribution<double> jitter(0.0, config_.roughening);
      for (auto& p : next) {
        for (auto& b : p.bias) b = std::clamp(b + jitter(rng_), 0.0, 1.0);
      }
    }
    particles_ = std::move(next);
  }

  const Dataset* data_;
  HmmConfig config_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> channels_;
  std::vector<Channel> layout_;
  std::vector<Particle> particles_;
  std::vector<std::vector<double>> columns_;  // per channel, the attribute's values
  double last_ess_ = 0.0;
  std::size_t resample_count_ = 0;
  std::size_t observations_ = 0;
};

}  // namespace usermodel
