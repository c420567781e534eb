#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "metaacl/meta.hpp"
#include "metaacl/serialize.hpp"
#include "metaacl/stats.hpp"
#include "metaacl/toy_env.hpp"

namespace metaacl {

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

enum class Condition {
  random,     // uniform task sampling
  alpgmm,     // ALP-GMM with the exploratory rho
  adr,        // automatic domain randomization baseline
  in_r,       // expert curriculum alone, reward-based iteration
  in_t,       // expert curriculum alone, time-based iteration
  in_p,       // expert curriculum alone, pooled components
  again_r,    // curriculum + live ALP-GMM, reward-based iteration
  again_t,    // curriculum + live ALP-GMM, time-based iteration
  again_p,    // curriculum + live ALP-GMM, pooled components
  again_rnd,  // again_r with a random prior, no pretest
  again_gt,   // again_r with the ground-truth prior, no pretest
};

inline const std::array<Condition, 11>& all_conditions() {
  static const std::array<Condition, 11> all = {
      Condition::random,  Condition::alpgmm,  Condition::adr,
      Condition::in_r,    Condition::in_t,    Condition::in_p,
      Condition::again_r, Condition::again_t, Condition::again_p,
      Condition::again_rnd, Condition::again_gt};
  return all;
}

inline std::string condition_token(Condition c) {
  switch (c) {
    case Condition::random: return "random";
    case Condition::alpgmm: return "alpgmm";
    case Condition::adr: return "adr";
    case Condition::in_r: return "in_r";
    case Condition::in_t: return "in_t";
    case Condition::in_p: return "in_p";
    case Condition::again_r: return "again_r";
    case Condition::again_t: return "again_t";
    case Condition::again_p: return "again_p";
    case Condition::again_rnd: return "again_rnd";
    case Condition::again_gt: return "again_gt";
  }
  throw std::invalid_argument("unknown condition");
}

inline Condition condition_from_token(const std::string& token) {
  for (Condition c : all_conditions())
    if (condition_token(c) == token) return c;
  throw std::invalid_argument("unknown condition token: " + token);
}

inline bool condition_needs_history(Condition c) {
  switch (c) {
    case Condition::random:
    case Condition::alpgmm:
    case Condition::adr:
      return false;
    default:
      return true;
  }
}

inline bool condition_is_composite(Condition c) {
  switch (c) {
    case Condition::again_r:
    case Condition::again_t:
    case Condition::again_p:
    case Condition::again_rnd:
    case Condition::again_gt:
      return true;
    default:
      return false;
  }
}

inline bool condition_has_pretest(Condition c) {
  switch (c) {
    case Condition::in_r:
    case Condition::in_t:
    case Condition::in_p:
    case Condition::again_r:
    case Condition::again_t:
    case Condition::again_p:
      return true;
    default:
      return false;
  }
}

inline InMode condition_in_mode(Condition c) {
  switch (c) {
    case Condition::in_t:
    case Condition::again_t:
      return InMode::time;
    case Condition::in_p:
    case Condition::again_p:
      return InMode::pool;
    default:
      return InMode::reward;
  }
}

// ---------------------------------------------------------------------------
// Experiment configuration and run records
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::size_t budget = 200000;          // total episodes per run
  std::size_t pretrain_budget = 20000;  // pretest share of the budget
  std::size_t seeds = 48;               // runs per condition
  std::uint64_t master_seed = 1;
  std::size_t checkpoint_every = 2000;  // performance curve resolution
  std::vector<std::size_t> student_types = default_student_types();
  MetaConfig meta;  // teacher parameters shared by every condition
  AdrConfig adr;    // box growth parameters; p_easy is chosen per run
};

// Sampling behavior counters kept for the composite conditions.
struct SamplingStats {
  std::size_t pretrain_draws = 0;
  std::size_t pretrain_uniform = 0;
  // pre-emancipation composite draws that were not forced-uniform, and how
  // many of them fell within 3 sigma of the active expert mixture
  std::size_t post_draws_nonuniform = 0;
  std::size_t post_in_support = 0;
  bool emancipated = false;
  std::size_t emancipation_episode = 0;
};

struct RunRecord {
  std::size_t seed_index = 0;
  Condition condition = Condition::random;
  std::size_t student_type = 0;
  std::vector<std::size_t> curve_episodes;
  std::vector<double> perf_curve;
  double final_perf = 0.0;
  KCVector kc_pre;                 // pretest conditions only
  std::size_t selected_prior = 0;  // history index, where applicable
  bool used_fallback = false;      // curation emptied the curriculum
  std::optional<SamplingStats> sampling;
};

// fixed stream tags for seed derivation
inline constexpr std::uint64_t kStreamEvalTypes = 1;
inline constexpr std::uint64_t kStreamClassroomTypes = 2;
inline constexpr std::uint64_t kStreamSweep = 3;
inline constexpr std::uint64_t kStreamTwoRun = 4;
inline constexpr std::uint64_t kStreamRunBase = 100;

// The evaluated student's type for a given seed index: the i-th draw from a
// dedicated stream, uniform over the configured types with replacement, so
// the assignment never depends on which conditions or seeds actually run.
inline std::size_t eval_student_type(const ExperimentConfig& cfg,
                                     std::size_t seed_index) {
  if (cfg.student_types.empty())
    throw std::invalid_argument("eval_student_type: no student types");
  Rng rng(derive_seed(cfg.master_seed, kStreamEvalTypes, 0));
  std::size_t type = cfg.student_types[0];
  for (std::size_t i = 0; i <= seed_index; ++i)
    type = cfg.student_types[rng.uniform_index(cfg.student_types.size())];
  return type;
}

// ---------------------------------------------------------------------------
// Worker pool
// ---------------------------------------------------------------------------

inline std::size_t harness_thread_count(std::size_t jobs) {
  if (jobs <= 1) return jobs;
  std::size_t n = 0;
  if (const char* env = std::getenv("METAACL_THREADS")) {
    const std::string s(env);
    if (!s.empty()) n = static_cast<std::size_t>(parse_int(s));
  } else {
    n = std::thread::hardware_concurrency();
  }
  if (n == 0) n = 1;
  return std::min(n, jobs);
}

// Index-parallel loop; results must be written to pre-sized slots so the
// outcome is identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t jobs, Fn&& fn) {
  const std::size_t threads = harness_thread_count(jobs);
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= jobs) break;
          fn(i);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Single runs
// ---------------------------------------------------------------------------

// squared Mahalanobis distance of a 2-D task under a component's task margin
inline double task_mahalanobis2(const GaussianComponent& comp,
                                const TaskParams& p) {
  const std::size_t d = comp.mean.size();
  if (d < 2 || p.dim() != 2)
    throw std::invalid_argument("task_mahalanobis2: needs 2-D tasks");
  const double a = comp.covariance[0];
  const double b = 0.5 * (comp.covariance[1] + comp.covariance[d]);
  const double c = comp.covariance[d + 1];
  double det = a * c - b * b;
  if (!(det > 1e-18)) det = 1e-18;
  const double dx = p.coords[0] - comp.mean[0];
  const double dy = p.coords[1] - comp.mean[1];
  return (c * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
}

// is the task within `sigma` of any component of the active expert mixture?
inline bool within_expert_support(const AgainTeacher& teacher,
                                  const TaskParams& p, double sigma = 3.0) {
  const double cap = sigma * sigma;
  const auto close = [&](const WeightedGMM& g) {
    for (const auto& comp : g.components)
      if (task_mahalanobis2(comp, p) <= cap) return true;
    return false;
  };
  if (const WeightedGMM* g = teacher.active_in_gmm()) return close(*g);
  if (!teacher.fallback_pure_alpgmm() &&
      teacher.config().in_mode == InMode::pool) {
    for (const auto& g : teacher.curriculum().gmms)
      if (close(g)) return true;
  }
  return false;
}

namespace detail {

struct CurveTracker {
  const ExperimentConfig* cfg;
  RunRecord* rec;
  ToyStudent* student;

  void start() const {
    rec->curve_episodes.push_back(0);
    rec->perf_curve.push_back(student->performance());
  }

  void after_episode(std::size_t episodes_done) const {
    if (episodes_done % cfg->checkpoint_every == 0 ||
        episodes_done == cfg->budget) {
      rec->curve_episodes.push_back(episodes_done);
      rec->perf_curve.push_back(student->performance());
    }
  }
};

inline TaskParams cell_center(std::size_t cell) {
  const double gx = static_cast<double>(cell % ToyStudent::kGridSide);
  const double gy = static_cast<double>(cell / ToyStudent::kGridSide);
  return {(gx + 0.5) / ToyStudent::kGridSide,
          (gy + 0.5) / ToyStudent::kGridSide};
}

}  // namespace detail

inline RunRecord run_single(const ExperimentConfig& cfg, Condition cond,
                            std::size_t seed_index,
                            const std::vector<TrainingTrajectory>& history) {
  if (condition_needs_history(cond) && history.empty())
    throw std::invalid_argument("run_single: " + condition_token(cond) +
                                " needs a non-empty training history");
  RunRecord rec;
  rec.seed_index = seed_index;
  rec.condition = cond;
  rec.student_type = eval_student_type(cfg, seed_index);
  ToyStudent student(rec.student_type);
  Rng rng(derive_seed(cfg.master_seed,
                      kStreamRunBase + static_cast<std::uint64_t>(cond),
                      seed_index));
  const detail::CurveTracker curve{&cfg, &rec, &student};
  curve.start();

  const auto drive_plain = [&](Teacher& teacher, std::size_t from,
                               std::size_t to) {
    for (std::size_t ep = from; ep < to; ++ep) {
      const TaskParams p = teacher.sample(rng);
      const double r = student.episode(p);
      teacher.observe({p, r});
      curve.after_episode(ep + 1);
    }
  };

  const auto drive_composite = [&](AgainTeacher& teacher, std::size_t from,
                                   std::size_t to, SamplingStats& stats) {
    if (teacher.emancipated() && !stats.emancipated) {
      stats.emancipated = true;
      stats.emancipation_episode = from;
    }
    for (std::size_t ep = from; ep < to; ++ep) {
      const TaskParams p = teacher.sample(rng);
      if (!teacher.fallback_pure_alpgmm() && !teacher.emancipated() &&
          teacher.last_draw().source != AgainTeacher::DrawSource::uniform) {
        ++stats.post_draws_nonuniform;
        if (within_expert_support(teacher, p)) ++stats.post_in_support;
      }
      const double r = student.episode(p);
      teacher.observe({p, r});
      if (!stats.emancipated && teacher.emancipated()) {
        stats.emancipated = true;
        stats.emancipation_episode = ep + 1;
      }
      curve.after_episode(ep + 1);
    }
  };

  switch (cond) {
    case Condition::random: {
      RandomTeacher teacher(cfg.meta.alpgmm.task_dim);
      drive_plain(teacher, 0, cfg.budget);
      break;
    }
    case Condition::alpgmm: {
      AlpGmmConfig acfg = cfg.meta.alpgmm;
      acfg.rho_rnd = cfg.meta.rho_high;
      AlpGmmTeacher teacher(acfg, rng.next_u64());
      drive_plain(teacher, 0, cfg.budget);
      break;
    }
    case Condition::adr: {
      AdrConfig acfg = cfg.adr;
      acfg.task_dim = cfg.meta.alpgmm.task_dim;
      const std::size_t easy =
          cfg.student_types[rng.uniform_index(cfg.student_types.size())];
      acfg.p_easy = detail::cell_center(easy);
      AdrTeacher teacher(acfg);
      drive_plain(teacher, 0, cfg.budget);
      break;
    }
    case Condition::again_rnd:
    case Condition::again_gt: {
      MetaConfig m = cfg.meta;
      m.again.in_mode = InMode::reward;
      m.again.mix_alpgmm = true;
      auto res = cond == Condition::again_rnd
                     ? make_again_without_pretest(
                           history, SelectionMode::random, std::nullopt, m, rng)
                     : make_again_without_pretest(
                           history, SelectionMode::ground_truth,
                           static_cast<std::int64_t>(rec.student_type), m, rng);
      rec.selected_prior = res.selected_index;
      rec.used_fallback = res.curation_empty;
      SamplingStats stats;
      drive_composite(res.teacher, 0, cfg.budget, stats);
      rec.sampling = stats;
      break;
    }
    default: {  // the pretest family: in_r/t/p and again_r/t/p
      MetaConfig m = cfg.meta;
      m.again.in_mode = condition_in_mode(cond);
      m.again.mix_alpgmm = condition_is_composite(cond);
      SamplingStats stats;
      const std::size_t pre = std::min(cfg.pretrain_budget, cfg.budget);
      auto res = pretrain_and_select(
          student, history, pre, {}, m, rng,
          [&](std::size_t ep, const AlpGmmTeacher& t) {
            ++stats.pretrain_draws;
            if (t.last_draw_was_uniform()) ++stats.pretrain_uniform;
            curve.after_episode(ep + 1);
          });
      rec.kc_pre = res.kc_pre;
      rec.selected_prior = res.selected_index;
      rec.used_fallback = res.curation_empty;
      drive_composite(res.teacher, pre, cfg.budget, stats);
      rec.sampling = stats;
      break;
    }
  }

  rec.final_perf = student.performance();
  if (rec.curve_episodes.back() != cfg.budget) {
    rec.curve_episodes.push_back(cfg.budget);
    rec.perf_curve.push_back(rec.final_perf);
  }
  return rec;
}

inline std::vector<RunRecord> run_condition(
    const ExperimentConfig& cfg, Condition cond,
    const std::vector<TrainingTrajectory>& history) {
  std::vector<RunRecord> out(cfg.seeds);
  parallel_for(cfg.seeds,
               [&](std::size_t i) { out[i] = run_single(cfg, cond, i, history); });
  return out;
}

// ---------------------------------------------------------------------------
// Classroom generation
// ---------------------------------------------------------------------------

// Train `count` students with the exploratory ALP-GMM teacher and record
// their trajectories. Student i's run is seeded with master_seed + i. Types
// cycle over `types` when one_per_type is set and are otherwise drawn
// uniformly from a dedicated stream.
inline std::vector<TrainingTrajectory> generate_classroom(
    const ExperimentConfig& cfg, std::size_t count,
    const std::vector<std::size_t>& types, bool one_per_type) {
  if (types.empty())
    throw std::invalid_argument("generate_classroom: no student types");
  std::vector<std::size_t> assigned(count);
  Rng type_rng(derive_seed(cfg.master_seed, kStreamClassroomTypes, 0));
  for (std::size_t i = 0; i < count; ++i)
    assigned[i] = one_per_type ? types[i % types.size()]
                               : types[type_rng.uniform_index(types.size())];

  std::vector<TrainingTrajectory> out(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng(cfg.master_seed + i);
    ToyStudent student(assigned[i]);
    AlpGmmConfig acfg = cfg.meta.alpgmm;
    acfg.rho_rnd = cfg.meta.rho_high;
    AlpGmmTeacher teacher(acfg, rng.next_u64());
    TrajectoryRecorder recorder;
    recorder.attach(teacher);
    TrainingTrajectory& t = out[i];
    t.student_meta = static_cast<std::int64_t>(assigned[i]);
    if (cfg.pretrain_budget == 0) t.kc_pre = kc_vector(student, {});
    for (std::size_t ep = 0; ep < cfg.budget; ++ep) {
      const TaskParams p = teacher.sample(rng);
      const double r = student.episode(p);
      teacher.observe({p, r});
      if (ep + 1 == cfg.pretrain_budget) t.kc_pre = kc_vector(student, {});
    }
    TrajectoryRecorder::detach(teacher);
    recorder.flush(teacher);
    t.snapshots = recorder.take();
    t.kc_post = kc_vector(student, {});
    t.j_s = 0.0;
    for (const double v : t.kc_post) t.j_s += v;
    if (t.kc_pre.empty()) t.kc_pre = t.kc_post;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Prior-count sweep
// ---------------------------------------------------------------------------

struct SweepPoint {
  double fraction = 0.0;
  std::size_t prior_count = 0;
  Condition condition = Condition::again_r;
  double mean_final = 0.0;
  double sem_final = 0.0;
  std::size_t runs = 0;
};

// Uniform subset of ceil(fraction * n) trajectory indices, drawn without
// replacement from a per-fraction stream and sorted ascending.
inline std::vector<std::size_t> sweep_subset_indices(
    const ExperimentConfig& cfg, std::size_t n, double fraction,
    std::size_t fraction_index) {
  const auto want = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n)));
  const std::size_t take = std::min(want, n);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(derive_seed(cfg.master_seed, kStreamSweep, fraction_index));
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline std::vector<SweepPoint> run_sweep(
    const ExperimentConfig& cfg, const std::vector<TrainingTrajectory>& history,
    const std::vector<double>& fractions,
    const std::vector<Condition>& conditions) {
  std::vector<SweepPoint> points;
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    const auto idx =
        sweep_subset_indices(cfg, history.size(), fractions[fi], fi);
    if (idx.empty()) continue;  // nothing to select from at this fraction
    std::vector<TrainingTrajectory> sub;
    sub.reserve(idx.size());
    for (const std::size_t i : idx) sub.push_back(history[i]);
    for (const Condition cond : conditions) {
      const auto records = run_condition(cfg, cond, sub);
      std::vector<double> finals;
      finals.reserve(records.size());
      for (const auto& r : records) finals.push_back(r.final_perf);
      SweepPoint pt;
      pt.fraction = fractions[fi];
      pt.prior_count = idx.size();
      pt.condition = cond;
      pt.mean_final = mean_of(finals);
      pt.sem_final = finals.size() >= 2 ? standard_error(finals) : 0.0;
      pt.runs = finals.size();
      points.push_back(pt);
    }
  }
  return points;
}

// ---------------------------------------------------------------------------
// Same-student two-run protocol
// ---------------------------------------------------------------------------

struct TwoRunRecord {
  std::size_t seed_index = 0;
  std::size_t student_type = 0;
  double run1_final = 0.0;  // exploratory ALP-GMM from scratch
  double run2_final = 0.0;  // curriculum curated from run 1, fresh student
  bool curation_empty = false;
};

// Train a student with plain ALP-GMM, curate that very trajectory, reset the
// student, and train again under the composite teacher from episode 0.
inline std::vector<TwoRunRecord> run_two_run(const ExperimentConfig& cfg) {
  std::vector<TwoRunRecord> out(cfg.seeds);
  parallel_for(cfg.seeds, [&](std::size_t i) {
    TwoRunRecord& rec = out[i];
    rec.seed_index = i;
    rec.student_type = eval_student_type(cfg, i);
    Rng rng(derive_seed(cfg.master_seed, kStreamTwoRun, i));
    ToyStudent student(rec.student_type);

    AlpGmmConfig acfg = cfg.meta.alpgmm;
    acfg.rho_rnd = cfg.meta.rho_high;
    AlpGmmTeacher first(acfg, rng.next_u64());
    TrajectoryRecorder recorder;
    recorder.attach(first);
    for (std::size_t ep = 0; ep < cfg.budget; ++ep) {
      const TaskParams p = first.sample(rng);
      first.observe({p, student.episode(p)});
    }
    TrajectoryRecorder::detach(first);
    recorder.flush(first);
    rec.run1_final = student.performance();

    CuratedCurriculum curated = curate(recorder.take(), cfg.meta.delta_lp);
    rec.curation_empty = curated.empty();
    student.reset();
    AlpGmmConfig inner_cfg = cfg.meta.alpgmm;
    inner_cfg.rho_rnd = cfg.meta.rho_low;
    AgainConfig again_cfg = cfg.meta.again;
    again_cfg.in_mode = InMode::reward;
    again_cfg.mix_alpgmm = true;
    again_cfg.rho = cfg.meta.rho_low;
    AgainTeacher second(again_cfg, std::move(curated),
                        AlpGmmTeacher(inner_cfg, rng.next_u64()));
    for (std::size_t ep = 0; ep < cfg.budget; ++ep) {
      const TaskParams p = second.sample(rng);
      second.observe({p, student.episode(p)});
    }
    rec.run2_final = student.performance();
  });
  return out;
}

// ---------------------------------------------------------------------------
// CSV emission and ingestion
// ---------------------------------------------------------------------------

inline CsvTable results_table(const std::vector<RunRecord>& records) {
  CsvTable t;
  t.header = {"condition", "seed", "student_type", "episode", "perf"};
  for (const auto& rec : records) {
    const std::string cond = condition_token(rec.condition);
    const std::string seed = std::to_string(rec.seed_index);
    const std::string type = std::to_string(rec.student_type);
    for (std::size_t j = 0; j < rec.perf_curve.size(); ++j)
      t.rows.push_back({cond, seed, type,
                        std::to_string(rec.curve_episodes[j]),
                        format_double(rec.perf_curve[j])});
  }
  return t;
}

inline CsvTable summary_table(const std::vector<RunRecord>& records) {
  std::map<std::string, std::vector<double>> finals;
  for (const auto& rec : records)
    finals[condition_token(rec.condition)].push_back(rec.final_perf);
  CsvTable t;
  t.header = {"condition", "runs", "final_mean", "final_std", "final_sem"};
  for (const auto& [cond, xs] : finals) {
    const bool spread = xs.size() >= 2;
    t.rows.push_back({cond, std::to_string(xs.size()),
                      format_double(mean_of(xs)),
                      format_double(spread ? sample_std(xs) : 0.0),
                      format_double(spread ? standard_error(xs) : 0.0)});
  }
  return t;
}

inline CsvTable sweep_table(const std::vector<SweepPoint>& points) {
  CsvTable t;
  t.header = {"fraction", "prior_count", "condition", "runs", "final_mean",
              "final_sem"};
  for (const auto& p : points)
    t.rows.push_back({format_double(p.fraction),
                      std::to_string(p.prior_count),
                      condition_token(p.condition), std::to_string(p.runs),
                      format_double(p.mean_final),
                      format_double(p.sem_final)});
  return t;
}

inline CsvTable two_run_table(const std::vector<TwoRunRecord>& records) {
  CsvTable t;
  t.header = {"seed", "student_type", "run1_final", "run2_final",
              "curation_empty"};
  for (const auto& r : records)
    t.rows.push_back({std::to_string(r.seed_index),
                      std::to_string(r.student_type),
                      format_double(r.run1_final),
                      format_double(r.run2_final),
                      r.curation_empty ? "1" : "0"});
  return t;
}

// Final performance per (condition, seed) from a results table: the perf at
// that run's largest episode, keyed by condition, ordered by seed.
inline std::map<std::string, std::vector<double>> finals_by_condition(
    const CsvTable& table) {
  const std::size_t c_cond = table.column("condition");
  const std::size_t c_seed = table.column("seed");
  const std::size_t c_ep = table.column("episode");
  const std::size_t c_perf = table.column("perf");
  std::map<std::string, std::map<std::int64_t, std::pair<std::int64_t, double>>>
      best;
  for (const auto& row : table.rows) {
    const std::int64_t seed = parse_int(row[c_seed]);
    const std::int64_t ep = parse_int(row[c_ep]);
    const double perf = parse_double(row[c_perf]);
    auto& slot = best[row[c_cond]];
    const auto it = slot.find(seed);
    if (it == slot.end() || ep >= it->second.first)
      slot[seed] = {ep, perf};
  }
  std::map<std::string, std::vector<double>> out;
  for (const auto& [cond, seeds] : best) {
    auto& xs = out[cond];
    xs.reserve(seeds.size());
    for (const auto& [seed, pair] : seeds) xs.push_back(pair.second);
  }
  return out;
}

}  // namespace metaacl
