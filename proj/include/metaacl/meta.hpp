#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "metaacl/teachers.hpp"

namespace metaacl {

using KCVector = std::vector<double>;

// One fitted mixture from a teacher run plus the mean episodic reward over
// the last (up to 50) tasks sampled while it was current.
struct TrajectorySnapshot {
  WeightedGMM gmm;
  double mean_reward = 0.0;
};

// A previously trained student's record: its snapshot sequence, competence
// vectors before and after training, the summed post score, and an opaque
// ground-truth descriptor (the toy student type).
struct TrainingTrajectory {
  std::vector<TrajectorySnapshot> snapshots;
  KCVector kc_pre;
  KCVector kc_post;
  double j_s = 0.0;
  std::int64_t student_meta = -1;
};

// Expert curriculum: the filtered GMM list C and its paired thresholds R.
struct CuratedCurriculum {
  std::vector<WeightedGMM> gmms;
  std::vector<double> reward_thresholds;

  bool empty() const { return gmms.empty(); }
  std::size_t size() const { return gmms.size(); }
  std::size_t total_components() const {
    std::size_t n = 0;
    for (const auto& g : gmms) n += g.size();
    return n;
  }
};

// Drop every component whose LP utility is below delta_lp; GMMs left empty
// vanish together with their threshold; survivors get renormalized weights.
inline CuratedCurriculum curate(const std::vector<TrajectorySnapshot>& raw,
                                double delta_lp) {
  CuratedCurriculum out;
  for (const auto& snap : raw) {
    WeightedGMM g;
    g.fit_log_likelihood = snap.gmm.fit_log_likelihood;
    g.aic = snap.gmm.aic;
    for (const auto& comp : snap.gmm.components)
      if (comp.lp_utility >= delta_lp) g.components.push_back(comp);
    if (g.empty()) continue;
    double total = 0.0;
    for (const auto& comp : g.components) total += comp.weight;
    if (total > 0.0) {
      for (auto& comp : g.components) comp.weight /= total;
    } else {
      const double w = 1.0 / static_cast<double>(g.size());
      for (auto& comp : g.components) comp.weight = w;
    }
    out.gmms.push_back(std::move(g));
    out.reward_thresholds.push_back(snap.mean_reward);
  }
  return out;
}

inline double kc_distance2(const KCVector& a, const KCVector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("KC vectors must have equal length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// k-nearest trajectories by KC distance, then the one with the best post
// score among them; distance ties prefer the earlier trajectory, score ties
// prefer the lower history index.
inline std::size_t select_prior_index(
    const std::vector<TrainingTrajectory>& history, const KCVector& kc_pre,
    std::size_t k) {
  if (history.empty())
    throw std::invalid_argument("select_prior: empty history");
  if (k == 0) throw std::invalid_argument("select_prior: k must be > 0");
  const std::size_t n = history.size();
  std::vector<std::pair<double, std::size_t>> by_dist(n);
  for (std::size_t i = 0; i < n; ++i)
    by_dist[i] = {kc_distance2(history[i].kc_pre, kc_pre), i};
  std::sort(by_dist.begin(), by_dist.end());
  const std::size_t kk = std::min(k, n);
  std::size_t best = by_dist[0].second;
  double best_js = history[best].j_s;
  for (std::size_t i = 1; i < kk; ++i) {
    const std::size_t idx = by_dist[i].second;
    if (history[idx].j_s > best_js ||
        (history[idx].j_s == best_js && idx < best)) {
      best = idx;
      best_js = history[idx].j_s;
    }
  }
  return best;
}

inline const TrainingTrajectory& select_prior(
    const std::vector<TrainingTrajectory>& history, const KCVector& kc_pre,
    std::size_t k) {
  return history[select_prior_index(history, kc_pre, k)];
}

enum class SelectionMode { kc, random, ground_truth };

// Trajectory choice for the AGAIN variants: KC matching, uniform random, or
// ground-truth type filtering (falling back to KC when no type matches).
inline std::size_t variant_select_index(
    const std::vector<TrainingTrajectory>& history, SelectionMode mode,
    const std::optional<KCVector>& kc_pre,
    std::optional<std::int64_t> truth_meta, std::size_t k, Rng& rng) {
  if (history.empty())
    throw std::invalid_argument("variant_select: empty history");
  if (mode == SelectionMode::random) return rng.uniform_index(history.size());
  if (mode == SelectionMode::ground_truth) {
    if (!truth_meta)
      throw std::invalid_argument(
          "variant_select: ground_truth mode needs the true student meta");
    const std::int64_t want = *truth_meta;
    std::size_t best = history.size();
    for (std::size_t i = 0; i < history.size(); ++i) {
      if (history[i].student_meta != want) continue;
      if (best == history.size() || history[i].j_s > history[best].j_s)
        best = i;
    }
    if (best != history.size()) return best;
    // no trajectory of that type on record; degrade to KC matching
  }
  if (!kc_pre)
    throw std::invalid_argument(
        "variant_select: KC matching needs a pre-test KC vector");
  return select_prior_index(history, *kc_pre, k);
}

enum class InMode { time, pool, reward };

// FIFO of fixed capacity with a running sum; backs the reward window and the
// live LP estimates.
class RunningWindow {
 public:
  explicit RunningWindow(std::size_t cap) : cap_(cap), buf_(cap) {
    if (cap_ == 0) throw std::invalid_argument("RunningWindow: zero capacity");
  }

  void push(double x) {
    if (count_ < cap_) {
      buf_[(head_ + count_) % cap_] = x;
      ++count_;
    } else {
      sum_ -= buf_[head_];
      buf_[head_] = x;
      head_ = (head_ + 1) % cap_;
    }
    sum_ += x;
  }

  void clear() {
    head_ = 0;
    count_ = 0;
    sum_ = 0.0;
  }

  bool full() const { return count_ == cap_; }
  bool empty() const { return count_ == 0; }
  std::size_t size() const { return count_; }
  double mean() const {
    return count_ == 0 ? 0.0 : sum_ / static_cast<double>(count_);
  }

  // mean over the newest min(span, size) entries
  double tail_mean(std::size_t span) const {
    if (count_ == 0) return 0.0;
    const std::size_t n = std::min(span, count_);
    double s = 0.0;
    for (std::size_t i = count_ - n; i < count_; ++i)
      s += buf_[(head_ + i) % cap_];
    return s / static_cast<double>(n);
  }

 private:
  std::size_t cap_;
  std::vector<double> buf_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  double sum_ = 0.0;
};

struct AgainConfig {
  InMode in_mode = InMode::reward;
  bool mix_alpgmm = true;   // false gives the pure expert-curriculum teacher
  double rho = 0.02;        // residual uniform share of composite sampling
  std::size_t advance_window = 250;  // reward-window capacity / time period
  // span of the pass statistic: the advancement check compares the mean of
  // this many newest window entries against the recorded stage reward, which
  // itself is a mean over the same span of the donor run
  std::size_t advance_span = 50;
  std::size_t live_lp_window = 50;
};

// Composite teacher: an expert curriculum iterated in time, pool, or reward
// mode, optionally mixed with a live ALP-GMM teacher. With an empty
// curriculum it delegates verbatim to the inner ALP-GMM teacher. Once the
// last curriculum GMM is reached (reward/time modes) the teacher is
// emancipated: IN utilities switch from the stored constants to running-mean
// ALP estimates over tasks attributed to each component.
class AgainTeacher final : public Teacher {
 public:
  enum class DrawSource { uniform, in_component, alpgmm_component };
  struct DrawInfo {
    DrawSource source = DrawSource::uniform;
    std::size_t component = 0;  // within the active IN mixture or ALP-GMM
  };

  AgainTeacher(AgainConfig cfg, CuratedCurriculum curriculum,
               AlpGmmTeacher alpgmm)
      : cfg_(cfg),
        curriculum_(std::move(curriculum)),
        alpgmm_(std::move(alpgmm)),
        reward_window_(cfg.advance_window) {
    if (!(cfg_.rho >= 0.0 && cfg_.rho <= 1.0))
      throw std::invalid_argument("AgainTeacher: rho must be in [0,1]");
    if (cfg_.advance_span == 0)
      throw std::invalid_argument("AgainTeacher: advance_span must be >= 1");
    if (curriculum_.gmms.size() != curriculum_.reward_thresholds.size())
      throw std::invalid_argument(
          "AgainTeacher: curriculum thresholds must pair with its GMMs");
    fallback_ = curriculum_.empty();
    if (!fallback_) {
      for (const auto& g : curriculum_.gmms)
        if (g.empty())
          throw std::invalid_argument("AgainTeacher: empty curriculum GMM");
      update_emancipation();
    }
  }

  TaskParams sample(Rng& rng) override {
    if (fallback_) {
      TaskParams p = alpgmm_.sample(rng);
      last_draw_ = alpgmm_.last_draw_was_uniform()
                       ? DrawInfo{DrawSource::uniform, 0}
                       : DrawInfo{DrawSource::alpgmm_component,
                                  *alpgmm_.last_component()};
      return p;
    }
    pending_attribution_.reset();
    if (cfg_.mix_alpgmm && rng.uniform() < cfg_.rho) {
      last_draw_ = {DrawSource::uniform, 0};
      return uniform_task(task_dim(), rng);
    }
    pool_.clear();
    const std::size_t n_in = build_in_pool();
    if (cfg_.mix_alpgmm && alpgmm_.current_gmm())
      for (const auto& comp : alpgmm_.current_gmm()->components)
        pool_.push_back({&comp, comp.lp_utility});
    std::size_t chosen = 0;
    TaskParams p = sample_from_mixture(pool_, task_dim(), rng, &chosen);
    if (chosen < n_in) {
      last_draw_ = {DrawSource::in_component, chosen};
      if (emancipated_) pending_attribution_ = chosen;
    } else {
      last_draw_ = {DrawSource::alpgmm_component, chosen - n_in};
    }
    return p;
  }

  void observe(const EpisodeOutcome& outcome) override {
    if (fallback_) {
      alpgmm_.observe(outcome);
      return;
    }
    double alp = 0.0;
    bool have_alp = false;
    if (cfg_.mix_alpgmm) {
      alp = alpgmm_.observe_with_alp(outcome);
      have_alp = true;
    }
    advance(outcome.reward);
    if (emancipated_ && have_alp && pending_attribution_)
      live_lp_[*pending_attribution_].push(alp);
    pending_attribution_.reset();
  }

  std::size_t in_index() const { return in_index_; }
  const RunningWindow& reward_window() const { return reward_window_; }
  bool emancipated() const { return emancipated_; }
  bool fallback_pure_alpgmm() const { return fallback_; }
  const CuratedCurriculum& curriculum() const { return curriculum_; }
  const AlpGmmTeacher& alpgmm() const { return alpgmm_; }
  AlpGmmTeacher& alpgmm_mutable() { return alpgmm_; }
  const AgainConfig& config() const { return cfg_; }
  DrawInfo last_draw() const { return last_draw_; }

  // mixture currently driving IN draws; null in pool mode and fallback
  const WeightedGMM* active_in_gmm() const {
    if (fallback_ || cfg_.in_mode == InMode::pool) return nullptr;
    return &curriculum_.gmms[in_index_];
  }

  // stored or live utilities of the active IN components, matching the order
  // used for sampling
  std::vector<double> active_in_utilities() const {
    std::vector<double> u;
    if (fallback_) return u;
    if (cfg_.in_mode == InMode::pool) {
      for (const auto& g : curriculum_.gmms)
        for (const auto& comp : g.components) u.push_back(comp.lp_utility);
      return u;
    }
    const WeightedGMM& g = curriculum_.gmms[in_index_];
    for (std::size_t c = 0; c < g.size(); ++c)
      u.push_back(in_utility(g.components[c], c));
    return u;
  }

 private:
  std::size_t task_dim() const { return alpgmm_.config().task_dim; }

  double in_utility(const GaussianComponent& comp, std::size_t c) const {
    if (emancipated_ && c < live_lp_.size() && !live_lp_[c].empty())
      return live_lp_[c].mean();
    return comp.lp_utility;
  }

  std::size_t build_in_pool() {
    if (cfg_.in_mode == InMode::pool) {
      for (const auto& g : curriculum_.gmms)
        for (const auto& comp : g.components)
          pool_.push_back({&comp, comp.lp_utility});
      return pool_.size();
    }
    const WeightedGMM& g = curriculum_.gmms[in_index_];
    for (std::size_t c = 0; c < g.size(); ++c)
      pool_.push_back({&g.components[c], in_utility(g.components[c], c)});
    return pool_.size();
  }

  void advance(double reward) {
    if (cfg_.in_mode == InMode::pool) return;
    if (cfg_.in_mode == InMode::reward) {
      // The pacing signal is the student's reward on tasks the expert
      // curriculum itself proposed; episodes drawn by the uniform coin or by
      // the exploratory mixture stay out of the window. The window rolls
      // (FIFO, never cleared), so once it clears a stage's bar it can
      // cascade through consecutive already-mastered stages. The pass
      // statistic spans the same number of draws as the recorded stage
      // reward it is compared against: a wider mean is systematically more
      // exposed to stray low-reward draws from mixture tails and could
      // never match a stage whose recorded mean sits at the reward cap.
      if (last_draw_.source != DrawSource::in_component) return;
      reward_window_.push(reward);
      if (reward_window_.full() &&
          reward_window_.tail_mean(cfg_.advance_span) >=
              curriculum_.reward_thresholds[in_index_])
        bump_index();
    } else {
      ++observed_;
      if (observed_ % cfg_.advance_window == 0) bump_index();
    }
  }

  void bump_index() {
    if (in_index_ + 1 < curriculum_.size()) ++in_index_;
    update_emancipation();
  }

  void update_emancipation() {
    if (cfg_.in_mode == InMode::pool) return;
    if (in_index_ + 1 == curriculum_.size() && !emancipated_) {
      emancipated_ = true;
      live_lp_.assign(curriculum_.gmms.back().size(),
                      RunningWindow(cfg_.live_lp_window));
    }
  }

  AgainConfig cfg_;
  CuratedCurriculum curriculum_;
  AlpGmmTeacher alpgmm_;
  RunningWindow reward_window_;
  std::vector<RunningWindow> live_lp_;
  std::vector<WeightedComponentRef> pool_;
  std::size_t in_index_ = 0;
  std::size_t observed_ = 0;
  bool emancipated_ = false;
  bool fallback_ = false;
  DrawInfo last_draw_;
  std::optional<std::size_t> pending_attribution_;
};

// Captures one TrajectorySnapshot per completed GMM reign of an ALP-GMM
// teacher. Attach before the run; flush at the end to record the mixture
// still in place (if it governed at least one episode).
class TrajectoryRecorder {
 public:
  void attach(AlpGmmTeacher& teacher) {
    teacher.set_refit_hook(
        [this](const WeightedGMM& gmm, double mean_reward) {
          snapshots_.push_back({gmm, mean_reward});
        });
  }

  static void detach(AlpGmmTeacher& teacher) { teacher.set_refit_hook({}); }

  void flush(const AlpGmmTeacher& teacher) {
    if (teacher.current_gmm() && teacher.episodes_since_refit() > 0)
      snapshots_.push_back(
          {*teacher.current_gmm(), teacher.mean_recent_reward()});
  }

  const std::vector<TrajectorySnapshot>& snapshots() const {
    return snapshots_;
  }
  std::vector<TrajectorySnapshot> take() { return std::move(snapshots_); }

 private:
  std::vector<TrajectorySnapshot> snapshots_;
};

struct MetaConfig {
  AlpGmmConfig alpgmm;  // dims, fit cadence, reward range, EM settings
  double rho_high = 0.10;
  double rho_low = 0.02;
  double delta_lp = 0.2;
  std::size_t knn = 3;
  AgainConfig again;
};

struct PretrainResult {
  AgainTeacher teacher;
  std::vector<TrajectorySnapshot> pretrain_snapshots;
  KCVector kc_pre;
  std::size_t selected_index = 0;
  bool curation_empty = false;
};

// Per-episode watcher for the pretraining loop: called after each outcome is
// observed, with the 0-based episode index and the teacher's sampling state
// for that episode still intact.
using PretrainWatcher =
    std::function<void(std::size_t episode, const AlpGmmTeacher&)>;

// The AGAIN pretrain phase: run ALP-GMM at rho_high for budget_pre episodes,
// read the student's KC vector, pick a prior trajectory by kNN, curate it,
// and hand over a composite teacher whose inner ALP-GMM keeps the pretraining
// history (fresh mixture, rho_low). Throws on an empty history; the caller
// degrades to pure ALP-GMM in that case.
template <typename Student>
PretrainResult pretrain_and_select(
    Student& student, const std::vector<TrainingTrajectory>& history,
    std::size_t budget_pre, const std::vector<TaskParams>& probe_set,
    const MetaConfig& cfg, Rng& rng, const PretrainWatcher& watch = {}) {
  if (history.empty())
    throw std::invalid_argument("pretrain_and_select: empty history");
  AlpGmmConfig acfg = cfg.alpgmm;
  acfg.rho_rnd = cfg.rho_high;
  AlpGmmTeacher pre(acfg, rng.next_u64());
  TrajectoryRecorder recorder;
  recorder.attach(pre);
  for (std::size_t ep = 0; ep < budget_pre; ++ep) {
    const TaskParams p = pre.sample(rng);
    const double r = student.episode(p);
    pre.observe({p, r});
    if (watch) watch(ep, pre);
  }
  TrajectoryRecorder::detach(pre);
  KCVector kc_pre = kc_vector(student, probe_set);
  const std::size_t sel = select_prior_index(history, kc_pre, cfg.knn);
  CuratedCurriculum curated = curate(history[sel].snapshots, cfg.delta_lp);
  pre.set_rho_rnd(cfg.rho_low);
  pre.reset_gmm();
  AgainConfig again_cfg = cfg.again;
  again_cfg.rho = cfg.rho_low;
  const bool empty = curated.empty();
  return PretrainResult{
      AgainTeacher(again_cfg, std::move(curated), std::move(pre)),
      recorder.take(), std::move(kc_pre), sel, empty};
}

// AGAIN_RND / AGAIN_GT construction: no pretest, expert curriculum active
// from episode 0, fresh inner ALP-GMM at rho_low.
struct NoPretestResult {
  AgainTeacher teacher;
  std::size_t selected_index = 0;
  bool curation_empty = false;
};

inline NoPretestResult make_again_without_pretest(
    const std::vector<TrainingTrajectory>& history, SelectionMode mode,
    std::optional<std::int64_t> truth_meta, const MetaConfig& cfg, Rng& rng) {
  if (history.empty())
    throw std::invalid_argument("make_again_without_pretest: empty history");
  // selection happens before any training, when the student's competence
  // vector is identically zero; that is the KC query the ground-truth mode
  // degrades to when no trajectory of the right type exists
  const KCVector zero_kc(history.front().kc_pre.size(), 0.0);
  const std::size_t sel =
      variant_select_index(history, mode, zero_kc, truth_meta, cfg.knn, rng);
  CuratedCurriculum curated = curate(history[sel].snapshots, cfg.delta_lp);
  AlpGmmConfig acfg = cfg.alpgmm;
  acfg.rho_rnd = cfg.rho_low;
  AlpGmmTeacher inner(acfg, rng.next_u64());
  AgainConfig again_cfg = cfg.again;
  again_cfg.rho = cfg.rho_low;
  const bool empty = curated.empty();
  return NoPretestResult{
      AgainTeacher(again_cfg, std::move(curated), std::move(inner)), sel,
      empty};
}

}  // namespace metaacl
