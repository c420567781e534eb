// End-to-end walkthrough on a scaled-down protocol: train a small classroom
// of toy students with the exploratory teacher, then compare a fresh
// student's outcome under three curricula — random tasks, standalone
// ALP-GMM, and the composite expert-curriculum teacher seeded from the
// classroom history. Finishes in well under a minute.
#include <cstdio>

#include "metaacl/harness.hpp"
#include "metaacl/report.hpp"

using namespace metaacl;

int main() {
  ExperimentConfig cfg;
  cfg.budget = 40000;
  cfg.pretrain_budget = 4000;
  cfg.seeds = 2;
  cfg.master_seed = 7;
  cfg.checkpoint_every = 5000;

  std::printf("training a classroom of 8 students (budget %zu each)...\n",
              cfg.budget);
  const auto history =
      generate_classroom(cfg, 8, cfg.student_types, /*one_per_type=*/false);
  std::printf("recorded %zu trajectories, %zu snapshots each\n\n",
              history.size(), history.front().snapshots.size());

  std::vector<RunRecord> all;
  for (const Condition cond :
       {Condition::random, Condition::alpgmm, Condition::again_r}) {
    std::printf("running %s (%zu seeds)...\n", condition_token(cond).c_str(),
                cfg.seeds);
    auto recs = run_condition(cfg, cond, history);
    for (const auto& r : recs) {
      std::printf("  seed %zu  type %3zu  final %6.2f%s\n", r.seed_index,
                  r.student_type, r.final_perf,
                  r.used_fallback ? "  (fallback: curation emptied)" : "");
      if (r.sampling && r.sampling->emancipated)
        std::printf("           curriculum exhausted at episode %zu\n",
                    r.sampling->emancipation_episode);
    }
    all.insert(all.end(), recs.begin(), recs.end());
  }

  std::printf("\n%s", render_text_table(summary_table(all)).c_str());
  return 0;
}
