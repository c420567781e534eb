// metaacl — command-line front end for the curriculum-teaching library.
//
// Subcommands cover the full experiment workflow: generating a classroom of
// exploratory training trajectories, running a teaching condition against
// fresh students, sweeping the prior-pool size, the same-student two-run
// protocol, Welch t-tests between result files, and text/SVG reports.

#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metaacl/harness.hpp"
#include "metaacl/report.hpp"

namespace {

using namespace metaacl;

std::string summary_path_for(const std::string& out) {
  const std::string suffix = ".csv";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0)
    return out.substr(0, out.size() - suffix.size()) + "_summary.csv";
  return out + "_summary.csv";
}

std::vector<std::size_t> types_from_name(const std::string& name) {
  if (name == "canonical") return default_student_types();
  if (name == "all") return all_student_types();
  throw CLI::ValidationError("--types", "expected 'canonical' or 'all'");
}

std::vector<Condition> conditions_from_tokens(
    const std::vector<std::string>& tokens) {
  std::vector<Condition> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(condition_from_token(t));
  return out;
}

// Finals for one condition out of a results CSV; `wanted` empty means the
// file must contain exactly one condition.
std::vector<double> finals_for(const CsvTable& table, std::string wanted,
                               const std::string& which) {
  const auto finals = finals_by_condition(table);
  if (finals.empty())
    throw std::runtime_error(which + ": results file has no rows");
  if (wanted.empty()) {
    if (finals.size() != 1) {
      std::string tokens;
      for (const auto& [cond, xs] : finals)
        tokens += (tokens.empty() ? "" : ", ") + cond;
      throw std::runtime_error(which +
                               ": file holds several conditions (" + tokens +
                               "); pick one with --cond-" + which);
    }
    return finals.begin()->second;
  }
  const auto it = finals.find(wanted);
  if (it == finals.end())
    throw std::runtime_error(which + ": condition '" + wanted +
                             "' not present in file");
  return it->second;
}

CsvTable summary_from_finals(
    const std::map<std::string, std::vector<double>>& finals) {
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

int run_cli(int argc, char** argv) {
  CLI::App app{"Curriculum-teaching experiments on the toy grid student"};
  app.require_subcommand(1);

  // Shared experiment knobs, reused by the subcommands that run episodes.
  ExperimentConfig cfg;

  // ---- gen-classroom -------------------------------------------------------
  auto* gen = app.add_subcommand(
      "gen-classroom", "Train exploratory teachers and record trajectories");
  std::size_t gen_n = 128;
  std::string gen_types = "canonical";
  bool gen_one_per_type = false;
  std::string gen_out;
  gen->add_option("--n", gen_n, "Number of students to train");
  gen->add_option("--types", gen_types,
                  "Student type pool: 'canonical' (4) or 'all' (400)");
  gen->add_flag("--one-per-type", gen_one_per_type,
                "Cycle through the type pool instead of sampling it");
  gen->add_option("--seed", cfg.master_seed, "Master seed");
  gen->add_option("--budget", cfg.budget, "Episodes per student");
  gen->add_option("--pretrain", cfg.pretrain_budget,
                  "Episode at which the pre-test probe is recorded");
  gen->add_option("--out", gen_out, "Output trajectory JSONL")->required();

  // ---- run -----------------------------------------------------------------
  auto* run = app.add_subcommand(
      "run", "Run one teaching condition over fresh evaluation students");
  std::string run_condition_token = "again_r";
  std::string run_history;
  std::string run_out;
  std::string run_summary;
  run->add_option("--condition", run_condition_token,
                  "random|alpgmm|adr|in_r|in_t|in_p|again_r|again_t|again_p|"
                  "again_rnd|again_gt");
  run->add_option("--history", run_history,
                  "Classroom trajectory JSONL (for prior-based conditions)");
  run->add_option("--seeds", cfg.seeds, "Number of evaluation students");
  run->add_option("--seed", cfg.master_seed, "Master seed");
  run->add_option("--budget", cfg.budget, "Episodes per student");
  run->add_option("--pretrain", cfg.pretrain_budget,
                  "Pre-test training budget for pretest conditions");
  run->add_option("--checkpoint", cfg.checkpoint_every,
                  "Episodes between recorded curve points");
  run->add_option("--out", run_out, "Output results CSV")->required();
  run->add_option("--summary", run_summary,
                  "Summary CSV path (default: <out>_summary.csv)");

  // ---- sweep ---------------------------------------------------------------
  auto* sweep = app.add_subcommand(
      "sweep", "Vary the fraction of the classroom available as priors");
  std::string sweep_history;
  std::vector<double> sweep_fractions = {0.025, 0.05, 0.1, 0.25, 0.5, 1.0};
  std::vector<std::string> sweep_conditions = {"again_r", "in_r"};
  std::string sweep_out;
  sweep->add_option("--history", sweep_history, "Classroom trajectory JSONL")
      ->required();
  sweep->add_option("--fractions", sweep_fractions,
                    "Fractions of the classroom to keep")
      ->delimiter(',');
  sweep->add_option("--conditions", sweep_conditions,
                    "Conditions to evaluate at each fraction")
      ->delimiter(',');
  sweep->add_option("--seeds", cfg.seeds, "Evaluation students per cell");
  sweep->add_option("--seed", cfg.master_seed, "Master seed");
  sweep->add_option("--budget", cfg.budget, "Episodes per student");
  sweep->add_option("--pretrain", cfg.pretrain_budget, "Pre-test budget");
  sweep->add_option("--out", sweep_out, "Output sweep CSV")->required();

  // ---- two-run -------------------------------------------------------------
  auto* two = app.add_subcommand(
      "two-run", "Exploratory run, curate it, rerun the same student type");
  std::string two_out;
  two->add_option("--seeds", cfg.seeds, "Number of students");
  two->add_option("--seed", cfg.master_seed, "Master seed");
  two->add_option("--budget", cfg.budget, "Episodes per run");
  two->add_option("--out", two_out, "Output CSV")->required();

  // ---- stats ---------------------------------------------------------------
  auto* stats = app.add_subcommand(
      "stats", "Welch t-test on final performance between two result files");
  std::string stats_a, stats_b, stats_cond_a, stats_cond_b;
  stats->add_option("--a", stats_a, "First results CSV")->required();
  stats->add_option("--b", stats_b, "Second results CSV")->required();
  stats->add_option("--cond-a", stats_cond_a,
                    "Condition to pick from the first file");
  stats->add_option("--cond-b", stats_cond_b,
                    "Condition to pick from the second file");

  // ---- report --------------------------------------------------------------
  auto* report = app.add_subcommand(
      "report", "Render merged result files as a text table or SVG curves");
  std::vector<std::string> report_in;
  std::string report_mode = "table";
  std::string report_out;
  std::string report_title = "Learning curves";
  report->add_option("--in", report_in, "Input results CSV (repeatable)")
      ->required()
      ->expected(-1);
  report->add_option("--mode", report_mode, "table | csv | svg");
  report->add_option("--out", report_out,
                     "Output path (table mode prints to stdout if omitted)");
  report->add_option("--title", report_title, "SVG plot title");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    const auto types = types_from_name(gen_types);
    const auto history = generate_classroom(cfg, gen_n, types,
                                            gen_one_per_type);
    save_history(gen_out, history);
    std::printf("wrote %zu trajectories to %s\n", history.size(),
                gen_out.c_str());
    return 0;
  }

  if (run->parsed()) {
    const Condition cond = condition_from_token(run_condition_token);
    std::vector<TrainingTrajectory> history;
    if (condition_needs_history(cond)) {
      if (run_history.empty())
        throw std::runtime_error("condition '" + run_condition_token +
                                 "' needs --history");
      history = load_history(run_history);
    }
    const auto records = run_condition(cfg, cond, history);
    save_csv(run_out, results_table(records));
    const CsvTable summary = summary_table(records);
    const std::string sumpath =
        run_summary.empty() ? summary_path_for(run_out) : run_summary;
    save_csv(sumpath, summary);
    std::printf("%s", render_text_table(summary).c_str());
    std::printf("wrote %s and %s\n", run_out.c_str(), sumpath.c_str());
    return 0;
  }

  if (sweep->parsed()) {
    const auto history = load_history(sweep_history);
    const auto points = run_sweep(cfg, history, sweep_fractions,
                                  conditions_from_tokens(sweep_conditions));
    const CsvTable table = sweep_table(points);
    save_csv(sweep_out, table);
    std::printf("%s", render_text_table(table).c_str());
    std::printf("wrote %s\n", sweep_out.c_str());
    return 0;
  }

  if (two->parsed()) {
    const auto records = run_two_run(cfg);
    save_csv(two_out, two_run_table(records));
    std::vector<double> r1, r2;
    for (const auto& r : records) {
      r1.push_back(r.run1_final);
      r2.push_back(r.run2_final);
    }
    std::printf("run1 mean %.2f  run2 mean %.2f  (n=%zu)\n", mean_of(r1),
                mean_of(r2), records.size());
    std::printf("wrote %s\n", two_out.c_str());
    return 0;
  }

  if (stats->parsed()) {
    const auto a = finals_for(load_csv(stats_a), stats_cond_a, "a");
    const auto b = finals_for(load_csv(stats_b), stats_cond_b, "b");
    const TTestResult r = welch_ttest(a, b);
    std::printf("a: n=%zu mean=%.3f std=%.3f\n", a.size(), mean_of(a),
                a.size() >= 2 ? sample_std(a) : 0.0);
    std::printf("b: n=%zu mean=%.3f std=%.3f\n", b.size(), mean_of(b),
                b.size() >= 2 ? sample_std(b) : 0.0);
    std::printf("welch t=%.6f df=%.6f p=%.6g\n", r.t, r.df, r.p);
    return 0;
  }

  if (report->parsed()) {
    std::vector<CsvTable> tables;
    tables.reserve(report_in.size());
    for (const auto& path : report_in) tables.push_back(load_csv(path));
    const CsvTable merged = merge_results(tables);
    if (report_mode == "csv") {
      if (report_out.empty())
        throw std::runtime_error("report --mode csv needs --out");
      save_csv(report_out, merged);
      std::printf("wrote %s\n", report_out.c_str());
    } else if (report_mode == "svg") {
      if (report_out.empty())
        throw std::runtime_error("report --mode svg needs --out");
      const auto curves = condition_curves(merged);
      save_text_file(report_out, render_curves_svg(curves, report_title));
      std::printf("wrote %s\n", report_out.c_str());
    } else if (report_mode == "table") {
      const CsvTable summary = summary_from_finals(finals_by_condition(merged));
      const std::string text = render_text_table(summary);
      if (report_out.empty()) {
        std::printf("%s", text.c_str());
      } else {
        save_text_file(report_out, text);
        std::printf("wrote %s\n", report_out.c_str());
      }
    } else {
      throw std::runtime_error("unknown report mode: " + report_mode);
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
