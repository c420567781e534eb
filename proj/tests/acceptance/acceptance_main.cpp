// Acceptance gate: end-to-end reproduction checks for the curriculum engine.
//
// Runs the full experiment protocol (classroom generation, the 11-condition
// comparative study, selection-variant comparisons, classroom-size sweep,
// sampling-structure audit, unit-suite timing, and the two-run protocol) and
// prints one PASS/FAIL line per check. Heavy stages are cached as files under
// --work-dir, so re-runs are cheap and an interrupted first run resumes.
//
// Usage: metaacl_acceptance [--work-dir DIR] [--only N] [--tests-bin PATH]
// Exit code is the number of failed checks.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "metaacl/harness.hpp"
#include "metaacl/report.hpp"
#include "metaacl/serialize.hpp"

namespace fs = std::filesystem;
using namespace metaacl;

namespace {

struct Gate {
  int failures = 0;
  int section = 0;

  void begin(int n, const std::string& title) {
    section = n;
    std::printf("\n== %d. %s ==\n", n, title.c_str());
  }

  void check(bool ok, const std::string& label, const std::string& detail) {
    std::printf("%s: [%d] %s — %s\n", ok ? "PASS" : "FAIL", section,
                label.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void note(const std::string& msg) {
  std::fprintf(stderr, "[acceptance] %s\n", msg.c_str());
}

std::string fmt(const char* f, double a, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<std::size_t> all_grid_types() {
  std::vector<std::size_t> t(ToyStudent::kCellCount);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = i;
  return t;
}

// ---------------------------------------------------------------------------
// Cached stages
// ---------------------------------------------------------------------------

std::vector<TrainingTrajectory> ensure_classroom(
    const fs::path& path, std::uint64_t master, std::size_t count,
    const std::vector<std::size_t>& types, bool one_per_type) {
  if (fs::exists(path)) {
    note("loading classroom " + path.string());
    return load_history(path.string());
  }
  note("generating classroom " + path.string() + " (" +
       std::to_string(count) + " students; this is the slow part)");
  ExperimentConfig cfg;
  cfg.master_seed = master;
  const auto t0 = std::chrono::steady_clock::now();
  auto history = generate_classroom(cfg, count, types, one_per_type);
  save_history(path.string(), history);
  note(fmt("classroom done in %.0f s", elapsed_s(t0)));
  return history;
}

CsvTable sampling_table(const std::vector<RunRecord>& records) {
  CsvTable t;
  t.header = {"seed",
              "final",
              "pretrain_draws",
              "pretrain_uniform",
              "post_draws_nonuniform",
              "post_in_support",
              "emancipated",
              "emancipation_episode"};
  for (const auto& r : records) {
    const SamplingStats s = r.sampling.value_or(SamplingStats{});
    t.rows.push_back({std::to_string(r.seed_index), format_double(r.final_perf),
                      std::to_string(s.pretrain_draws),
                      std::to_string(s.pretrain_uniform),
                      std::to_string(s.post_draws_nonuniform),
                      std::to_string(s.post_in_support),
                      s.emancipated ? "1" : "0",
                      std::to_string(s.emancipation_episode)});
  }
  return t;
}

// Final performances for one condition, generated or loaded from cache.
std::vector<double> ensure_condition(
    const fs::path& dir, const ExperimentConfig& cfg, Condition cond,
    const std::vector<TrainingTrajectory>& history) {
  const std::string token = condition_token(cond);
  const fs::path results = dir / (token + ".csv");
  const fs::path sampling = dir / (token + "_sampling.csv");
  const bool want_sampling = cond == Condition::again_r;
  if (fs::exists(results) && (!want_sampling || fs::exists(sampling))) {
    const auto finals = finals_by_condition(load_csv(results.string()));
    const auto it = finals.find(token);
    if (it != finals.end() && it->second.size() == cfg.seeds) {
      note("loaded " + token + " from cache");
      return it->second;
    }
  }
  note("running " + token + " (" + std::to_string(cfg.seeds) + " seeds)");
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = run_condition(cfg, cond, history);
  fs::create_directories(dir);
  save_csv(results.string(), results_table(records));
  if (want_sampling) save_csv(sampling.string(), sampling_table(records));
  note(fmt("%.0f s", elapsed_s(t0)));
  std::vector<double> finals;
  finals.reserve(records.size());
  for (const auto& r : records) finals.push_back(r.final_perf);
  return finals;
}

struct FractionResult {
  double fraction = 0.0;
  std::size_t prior_count = 0;
  std::vector<double> finals;
};

FractionResult ensure_fraction(const fs::path& dir,
                               const ExperimentConfig& cfg,
                               const std::vector<TrainingTrajectory>& history,
                               double fraction, std::size_t fraction_index) {
  FractionResult out;
  out.fraction = fraction;
  const auto idx =
      sweep_subset_indices(cfg, history.size(), fraction, fraction_index);
  out.prior_count = idx.size();
  const fs::path path =
      dir / ("sweep_f" + std::to_string(fraction_index) + ".csv");
  if (fs::exists(path)) {
    const auto finals = finals_by_condition(load_csv(path.string()));
    const auto it = finals.find(condition_token(Condition::again_r));
    if (it != finals.end() && it->second.size() == cfg.seeds) {
      note(fmt("loaded sweep fraction %.3f from cache", fraction));
      out.finals = it->second;
      return out;
    }
  }
  note(fmt("running sweep fraction %.3f (%.0f priors)", fraction,
           static_cast<double>(idx.size())));
  std::vector<TrainingTrajectory> sub;
  sub.reserve(idx.size());
  for (const std::size_t i : idx) sub.push_back(history[i]);
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = run_condition(cfg, Condition::again_r, sub);
  fs::create_directories(dir);
  save_csv(path.string(), results_table(records));
  note(fmt("%.0f s", elapsed_s(t0)));
  out.finals.reserve(records.size());
  for (const auto& r : records) out.finals.push_back(r.final_perf);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work_dir = "acceptance-cache";
  int only = 0;
  std::string tests_bin;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    const auto next = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "missing value for %s\n", arg.c_str());
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--work-dir") work_dir = next();
    else if (arg == "--only") only = std::atoi(next().c_str());
    else if (arg == "--tests-bin") tests_bin = next();
    else {
      std::fprintf(stderr,
                   "usage: %s [--work-dir DIR] [--only N] [--tests-bin PATH]\n",
                   argv[0]);
      return 2;
    }
  }
  if (tests_bin.empty())
    tests_bin = (fs::path(argv[0]).parent_path() / "metaacl_tests").string();
  fs::create_directories(work_dir);
  const auto wall0 = std::chrono::steady_clock::now();
  const auto want = [&](int n) { return only == 0 || only == n; };
  Gate gate;

  // Shared protocol objects ------------------------------------------------
  // Comparative study: 128-student classroom over the 4 canonical types.
  ExperimentConfig table_cfg;
  table_cfg.master_seed = 202;
  table_cfg.seeds = 48;

  std::vector<TrainingTrajectory> classroom4;
  const auto need_classroom4 = [&]() -> std::vector<TrainingTrajectory>& {
    if (classroom4.empty())
      classroom4 = ensure_classroom(work_dir / "classroom4.jsonl", 101, 128,
                                    default_student_types(), false);
    return classroom4;
  };

  const fs::path table_dir = work_dir / "comparative";
  std::map<Condition, std::vector<double>> finals;
  static const std::vector<TrainingTrajectory> kNoHistory;
  const auto need_finals = [&](Condition c) -> const std::vector<double>& {
    auto it = finals.find(c);
    if (it == finals.end()) {
      const auto& hist =
          condition_needs_history(c)
              ? static_cast<const std::vector<TrainingTrajectory>&>(
                    need_classroom4())
              : kNoHistory;
      it = finals.emplace(c, ensure_condition(table_dir, table_cfg, c, hist))
               .first;
    }
    return it->second;
  };
  const auto mean_for = [&](Condition c) { return mean_of(need_finals(c)); };

  // -------------------------------------------------------------------
  if (want(1)) {
    gate.begin(1, "comparative study: ordering, magnitudes, significance");
    const double m_again_r = mean_for(Condition::again_r);
    const double m_in_r = mean_for(Condition::in_r);
    const double m_alpgmm = mean_for(Condition::alpgmm);
    const double m_again_t = mean_for(Condition::again_t);
    const double m_in_t = mean_for(Condition::in_t);
    const double m_again_p = mean_for(Condition::again_p);
    const double m_in_p = mean_for(Condition::in_p);
    const double m_adr = mean_for(Condition::adr);
    const double m_random = mean_for(Condition::random);

    std::printf("  means: again_r=%.1f in_r=%.1f alpgmm=%.1f again_t=%.1f "
                "in_t=%.1f again_p=%.1f in_p=%.1f adr=%.1f random=%.1f\n",
                m_again_r, m_in_r, m_alpgmm, m_again_t, m_in_t, m_again_p,
                m_in_p, m_adr, m_random);

    gate.check(m_again_r > m_in_r, "again_r > in_r",
               fmt("%.2f vs %.2f", m_again_r, m_in_r));
    gate.check(m_in_r >= std::max(m_alpgmm, m_again_t),
               "in_r >= max(alpgmm, again_t)",
               fmt("%.2f vs %.2f", m_in_r, std::max(m_alpgmm, m_again_t)));
    gate.check(std::min(m_alpgmm, m_again_t) > m_in_t,
               "min(alpgmm, again_t) > in_t",
               fmt("%.2f vs %.2f", std::min(m_alpgmm, m_again_t), m_in_t));
    gate.check(m_in_t > std::max(m_again_p, m_in_p),
               "in_t > max(again_p, in_p)",
               fmt("%.2f vs %.2f", m_in_t, std::max(m_again_p, m_in_p)));
    gate.check(std::min(m_again_p, m_in_p) > m_adr,
               "min(again_p, in_p) > adr",
               fmt("%.2f vs %.2f", std::min(m_again_p, m_in_p), m_adr));
    gate.check(m_adr > m_random, "adr > random",
               fmt("%.2f vs %.2f", m_adr, m_random));

    gate.check(m_again_r >= 90.0, "again_r >= 90", fmt("%.2f", m_again_r));
    gate.check(m_alpgmm >= 70.0 && m_alpgmm <= 92.0, "alpgmm in [70, 92]",
               fmt("%.2f", m_alpgmm));
    gate.check(m_random >= 5.0 && m_random <= 18.0, "random in [5, 18]",
               fmt("%.2f", m_random));

    const auto tt =
        welch_ttest(need_finals(Condition::again_r), need_finals(Condition::alpgmm));
    gate.check(tt.p < 0.05 && m_again_r > m_alpgmm,
               "again_r > alpgmm significant",
               fmt("t=%.2f df=%.1f p=%.2g", tt.t, tt.df, tt.p));
  }

  // -------------------------------------------------------------------
  if (want(2)) {
    gate.begin(2, "selection variants: knn vs random vs ground truth");
    const auto& kc = need_finals(Condition::again_r);
    const auto& rnd = need_finals(Condition::again_rnd);
    const auto& gt = need_finals(Condition::again_gt);
    const auto tt = welch_ttest(kc, rnd);
    gate.check(tt.p < 0.05 && mean_of(kc) > mean_of(rnd),
               "knn selection beats random selection",
               fmt("%.2f vs %.2f, p=%.2g", mean_of(kc), mean_of(rnd), tt.p));
    const double gap = std::fabs(mean_of(kc) - mean_of(gt));
    const double se =
        std::sqrt(standard_error(kc) * standard_error(kc) +
                  standard_error(gt) * standard_error(gt));
    gate.check(gap <= 2.0 * se, "knn within 2 SE of ground truth",
               fmt("|%.2f - %.2f| = %.2f vs 2*SE = %.2f", mean_of(kc),
                   mean_of(gt), gap, 2.0 * se));
  }

  // -------------------------------------------------------------------
  if (want(3)) {
    gate.begin(3, "classroom-size sweep: monotonicity and the 10% point");
    ExperimentConfig sweep_cfg;
    sweep_cfg.master_seed = 404;
    sweep_cfg.seeds = 96;
    sweep_cfg.student_types = all_grid_types();
    auto classroom400 = ensure_classroom(work_dir / "classroom400.jsonl", 303,
                                         400, all_grid_types(), true);
    const std::vector<double> fractions = {0.025, 0.05, 0.1, 0.25, 0.5, 1.0};
    std::vector<FractionResult> pts;
    pts.reserve(fractions.size());
    for (std::size_t fi = 0; fi < fractions.size(); ++fi)
      pts.push_back(ensure_fraction(work_dir, sweep_cfg, classroom400,
                                    fractions[fi], fi));
    for (const auto& p : pts)
      std::printf("  fraction %.3f (%zu priors): mean %.2f sem %.2f\n",
                  p.fraction, p.prior_count, mean_of(p.finals),
                  standard_error(p.finals));
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double lo = mean_of(pts[i - 1].finals);
      const double hi = mean_of(pts[i].finals);
      const double se = std::sqrt(
          standard_error(pts[i - 1].finals) * standard_error(pts[i - 1].finals) +
          standard_error(pts[i].finals) * standard_error(pts[i].finals));
      gate.check(hi >= lo - se,
                 fmt("step %.3f -> %.3f non-decreasing within 1 SE",
                     pts[i - 1].fraction, pts[i].fraction),
                 fmt("%.2f -> %.2f (SE of step %.2f)", lo, hi, se));
    }
    // ALP-GMM on the same 96 evaluation students, no history involved
    const fs::path alp_path = work_dir / "alpgmm96";
    fs::create_directories(alp_path);
    const auto alp96 =
        ensure_condition(alp_path, sweep_cfg, Condition::alpgmm, {});
    const auto& f10 = pts[2];
    const auto tt = welch_ttest(f10.finals, alp96);
    gate.check(tt.p < 0.05 && mean_of(f10.finals) > mean_of(alp96),
               "10% classroom beats alpgmm",
               fmt("%.2f vs %.2f, p=%.2g", mean_of(f10.finals), mean_of(alp96),
                   tt.p));
  }

  // -------------------------------------------------------------------
  if (want(4)) {
    gate.begin(4, "sampling structure of the composite teacher");
    need_finals(Condition::again_r);  // materializes the sampling sidecar
    const CsvTable t =
        load_csv((table_dir / "again_r_sampling.csv").string());
    const std::size_t c_final = t.column("final");
    const std::size_t c_pd = t.column("pretrain_draws");
    const std::size_t c_pu = t.column("pretrain_uniform");
    const std::size_t c_nd = t.column("post_draws_nonuniform");
    const std::size_t c_ns = t.column("post_in_support");
    const std::size_t c_em = t.column("emancipated");
    std::size_t runs_ok_uniform = 0, successful = 0, emancipated = 0;
    double support_draws = 0, support_hits = 0;
    for (const auto& row : t.rows) {
      const double pd = parse_double(row[c_pd]);
      const double pu = parse_double(row[c_pu]);
      if (pd > 0 && pu / pd >= 0.1) ++runs_ok_uniform;
      support_draws += parse_double(row[c_nd]);
      support_hits += parse_double(row[c_ns]);
      if (parse_double(row[c_final]) >= 80.0) {
        ++successful;
        if (row[c_em] == "1") ++emancipated;
      }
    }
    gate.check(runs_ok_uniform == t.rows.size(),
               "pretraining uniform fraction >= rho_high in every run",
               fmt("%.0f of %.0f runs", double(runs_ok_uniform),
                   double(t.rows.size())));
    gate.check(support_draws > 0 && support_hits / support_draws >= 0.5,
               "post-selection draws concentrate in curated support",
               fmt("%.1f%% of %.0f draws", 100.0 * support_hits /
                   std::max(1.0, support_draws), support_draws));
    gate.check(successful > 0 && 2 * emancipated >= successful,
               "emancipation before budget in >= 50% of successful runs",
               fmt("%.0f of %.0f", double(emancipated), double(successful)));
  }

  // -------------------------------------------------------------------
  if (want(5)) {
    gate.begin(5, "property suites under five minutes");
    const std::string log = (work_dir / "unit_suite.log").string();
    const std::string cmd = tests_bin + " > " + log + " 2>&1";
    note("running " + tests_bin);
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = std::system(cmd.c_str());
    const double dur = elapsed_s(t0);
    gate.check(rc == 0, "unit and property suites pass",
               fmt("exit %.0f", double(rc)) + ", log: " + log);
    gate.check(dur < 300.0, "suites finish under 5 minutes",
               fmt("%.1f s", dur));
  }

  // -------------------------------------------------------------------
  if (want(6)) {
    gate.begin(6, "two-run protocol: replaying one's own curriculum");
    ExperimentConfig cfg;
    cfg.master_seed = 505;
    cfg.seeds = 20;
    const fs::path path = work_dir / "two_run.csv";
    CsvTable t;
    if (fs::exists(path)) {
      t = load_csv(path.string());
      note("loaded two-run results from cache");
    } else {
      note("running two-run protocol (20 seeds, two budgets each)");
      const auto t0 = std::chrono::steady_clock::now();
      t = two_run_table(run_two_run(cfg));
      save_csv(path.string(), t);
      note(fmt("%.0f s", elapsed_s(t0)));
    }
    const std::size_t c1 = t.column("run1_final");
    const std::size_t c2 = t.column("run2_final");
    std::vector<double> r1, r2;
    for (const auto& row : t.rows) {
      r1.push_back(parse_double(row[c1]));
      r2.push_back(parse_double(row[c2]));
    }
    gate.check(r1.size() == cfg.seeds, "all seeds completed",
               fmt("%.0f rows", double(r1.size())));
    gate.check(mean_of(r2) >= mean_of(r1),
               "second run at least matches the first on average",
               fmt("run2 %.2f vs run1 %.2f", mean_of(r2), mean_of(r1)));
  }

  std::printf("\n%d check(s) failed; wall time %.0f s\n", gate.failures,
              elapsed_s(wall0));
  return gate.failures;
}
