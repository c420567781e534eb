#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "metaacl/alp.hpp"
#include "metaacl/gmm.hpp"
#include "metaacl/rng.hpp"
#include "metaacl/task.hpp"

namespace metaacl {

// A teacher proposes tasks and is told exactly once, in order, how each
// proposed task went. Task parameters live in the unit box.
class Teacher {
 public:
  virtual ~Teacher() = default;
  virtual TaskParams sample(Rng& rng) = 0;
  virtual void observe(const EpisodeOutcome& outcome) = 0;
};

inline TaskParams uniform_task(std::size_t dim, Rng& rng) {
  TaskParams p;
  p.coords.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) p.coords[j] = rng.uniform();
  return p;
}

class RandomTeacher final : public Teacher {
 public:
  explicit RandomTeacher(std::size_t task_dim) : dim_(task_dim) {}
  TaskParams sample(Rng& rng) override { return uniform_task(dim_, rng); }
  void observe(const EpisodeOutcome&) override {}

 private:
  std::size_t dim_;
};

struct AlpGmmConfig {
  std::size_t task_dim = 2;
  std::size_t fit_rate = 250;  // refit period and window capacity
  double rho_rnd = 0.10;       // residual uniform sampling share
  RewardRange reward_range{0.0, 100.0};
  FitConfig fit;
};

// Absolute-learning-progress GMM teacher. Keeps the full task history for
// nearest-neighbour ALP, refits a GMM on the recent window every fit_rate
// episodes (AIC model selection over k), samples components proportionally
// to their mean ALP, and mixes in rho_rnd uniform exploration. The first
// fit_rate episodes are a pure-uniform bootstrap.
class AlpGmmTeacher final : public Teacher {
 public:
  // called just before a refit replaces a GMM that governed >= 1 episode
  using RefitHook =
      std::function<void(const WeightedGMM& outgoing, double mean_reward)>;

  AlpGmmTeacher(AlpGmmConfig cfg, std::uint64_t fit_seed)
      : cfg_(cfg),
        history_(cfg.task_dim, cfg.reward_range, cfg.fit_rate),
        fit_rng_(fit_seed) {
    if (cfg_.task_dim == 0)
      throw std::invalid_argument("AlpGmmTeacher: task_dim must be > 0");
    if (cfg_.fit_rate == 0)
      throw std::invalid_argument("AlpGmmTeacher: fit_rate must be > 0");
    if (!(cfg_.rho_rnd >= 0.0 && cfg_.rho_rnd <= 1.0))
      throw std::invalid_argument("AlpGmmTeacher: rho_rnd must be in [0,1]");
  }

  TaskParams sample(Rng& rng) override {
    if (!gmm_) {
      last_draw_uniform_ = true;
      last_component_.reset();
      return uniform_task(cfg_.task_dim, rng);
    }
    if (rng.uniform() < cfg_.rho_rnd) {
      last_draw_uniform_ = true;
      last_component_.reset();
      return uniform_task(cfg_.task_dim, rng);
    }
    pool_.clear();
    for (const auto& comp : gmm_->components)
      pool_.push_back({&comp, comp.lp_utility});
    std::size_t chosen = 0;
    TaskParams p = sample_from_mixture(pool_, cfg_.task_dim, rng, &chosen);
    last_draw_uniform_ = false;
    last_component_ = chosen;
    return p;
  }

  void observe(const EpisodeOutcome& outcome) override {
    observe_with_alp(outcome);
  }

  // same as observe, but hands back the ALP the outcome was recorded with
  double observe_with_alp(const EpisodeOutcome& outcome) {
    if (outcome.params.dim() != cfg_.task_dim)
      throw std::invalid_argument("AlpGmmTeacher: dimension mismatch");
    const double alp = history_.record(outcome);
    // Every episode of the reign counts toward its recorded mean reward,
    // residual uniform draws included. Their dilution keeps the recorded
    // means of fully mastered reigns strictly below the reward cap, which is
    // what makes the replayed thresholds attainable for a later student.
    reign_rewards_.push_back(outcome.reward);
    ++episodes_seen_;
    if (episodes_seen_ % cfg_.fit_rate == 0) refit();
    return alp;
  }

  const std::optional<WeightedGMM>& current_gmm() const { return gmm_; }
  const AlpHistory& history() const { return history_; }
  std::size_t episodes_seen() const { return episodes_seen_; }
  std::size_t refit_count() const { return refit_count_; }
  std::size_t episodes_since_refit() const { return reign_rewards_.size(); }
  const AlpGmmConfig& config() const { return cfg_; }

  bool last_draw_was_uniform() const { return last_draw_uniform_; }
  std::optional<std::size_t> last_component() const { return last_component_; }

  void set_rho_rnd(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0))
      throw std::invalid_argument("AlpGmmTeacher: rho_rnd must be in [0,1]");
    cfg_.rho_rnd = rho;
  }

  // drop the current mixture; sampling is uniform until the next refit
  void reset_gmm() { gmm_.reset(); }

  void set_refit_hook(RefitHook hook) { hook_ = std::move(hook); }

  // mean of the most recent `span` rewards of this reign (0 before any)
  double mean_recent_reward(std::size_t span = 50) const {
    if (reign_rewards_.empty()) return 0.0;
    const std::size_t n = std::min(span, reign_rewards_.size());
    double s = 0.0;
    for (std::size_t i = reign_rewards_.size() - n; i < reign_rewards_.size();
         ++i)
      s += reign_rewards_[i];
    return s / static_cast<double>(n);
  }

 private:
  void refit() {
    if (hook_ && gmm_ && !reign_rewards_.empty())
      hook_(*gmm_, mean_recent_reward());
    history_.copy_window(window_buf_);
    const std::size_t rows = history_.window_size();
    gmm_ = select_model(window_buf_.data(), rows, cfg_.task_dim + 1, cfg_.fit,
                        fit_rng_);
    ++refit_count_;
    reign_rewards_.clear();
  }

  AlpGmmConfig cfg_;
  AlpHistory history_;
  Rng fit_rng_;
  std::optional<WeightedGMM> gmm_;
  std::vector<double> reign_rewards_;
  std::vector<double> window_buf_;
  std::vector<WeightedComponentRef> pool_;
  std::size_t episodes_seen_ = 0;
  std::size_t refit_count_ = 0;
  bool last_draw_uniform_ = true;
  std::optional<std::size_t> last_component_;
  RefitHook hook_;
};

struct AdrConfig {
  std::size_t task_dim = 2;
  double rho_boundary = 0.5;  // share of draws pinned to a boundary face
  double reward_threshold = 1.0;
  double step = 0.05;
  std::size_t queue_capacity = 10;
  TaskParams p_easy;  // starting point; bounds grow outward from here
};

// Automatic domain randomization over an axis-aligned box. Non-boundary
// draws are uniform inside [low, high]. Boundary draws pin one coordinate
// to one face; when that face's last queue_capacity rewards average at or
// above the threshold, the face moves outward by one step (clipped to the
// unit box) and its queue clears. Bounds never shrink.
class AdrTeacher final : public Teacher {
 public:
  explicit AdrTeacher(AdrConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.task_dim == 0)
      throw std::invalid_argument("AdrTeacher: task_dim must be > 0");
    if (cfg_.p_easy.dim() != cfg_.task_dim)
      throw std::invalid_argument("AdrTeacher: p_easy dimension mismatch");
    check_unit_box(cfg_.p_easy);
    if (cfg_.queue_capacity == 0)
      throw std::invalid_argument("AdrTeacher: queue capacity must be > 0");
    low_ = cfg_.p_easy.coords;
    high_ = cfg_.p_easy.coords;
    queues_.resize(2 * cfg_.task_dim);
  }

  TaskParams sample(Rng& rng) override {
    pending_face_.reset();
    TaskParams p;
    p.coords.resize(cfg_.task_dim);
    if (rng.uniform() < cfg_.rho_boundary) {
      const std::size_t face = rng.uniform_index(2 * cfg_.task_dim);
      const std::size_t axis = face / 2;
      for (std::size_t j = 0; j < cfg_.task_dim; ++j)
        p.coords[j] = rng.uniform(low_[j], high_[j]);
      p.coords[axis] = (face % 2 == 0) ? low_[axis] : high_[axis];
      pending_face_ = face;
    } else {
      for (std::size_t j = 0; j < cfg_.task_dim; ++j)
        p.coords[j] = rng.uniform(low_[j], high_[j]);
    }
    return p;
  }

  void observe(const EpisodeOutcome& outcome) override {
    if (!pending_face_) return;
    const std::size_t face = *pending_face_;
    pending_face_.reset();
    auto& q = queues_[face];
    q.push_back(outcome.reward);
    if (q.size() < cfg_.queue_capacity) return;
    double mean = 0.0;
    for (const double r : q) mean += r;
    mean /= static_cast<double>(q.size());
    if (mean >= cfg_.reward_threshold) {
      const std::size_t axis = face / 2;
      if (face % 2 == 0)
        low_[axis] = std::max(0.0, low_[axis] - cfg_.step);
      else
        high_[axis] = std::min(1.0, high_[axis] + cfg_.step);
      q.clear();
    } else {
      q.pop_front();
    }
  }

  const std::vector<double>& low() const { return low_; }
  const std::vector<double>& high() const { return high_; }

 private:
  AdrConfig cfg_;
  std::vector<double> low_, high_;
  std::vector<std::deque<double>> queues_;
  std::optional<std::size_t> pending_face_;
};

}  // namespace metaacl
