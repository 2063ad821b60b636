// rad2img: command-line front end for the label-mapping experiments.
//
// Exit codes: 0 success, 1 validation error (bad flags, malformed input),
// 2 I/O error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rad2img.hpp"

namespace fs = std::filesystem;
using namespace rad2img;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct Common {
  std::string conditions;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  long min_positive = 50;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--conditions", c.conditions,
                  "Comma-separated condition names, or 'all'. Default: conditions with at "
                  "least --min-positive positive image labels");
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--out", c.out, "Output path (default: stdout)");
  cmd->add_option("--format", c.format, "csv, json or markdown")
      ->check(CLI::IsMember({"csv", "json", "markdown", "md"}));
  cmd->add_option("--min-positive", c.min_positive,
                  "Minimum positive image labels for a default evaluation condition");
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    if (!std::cout) throw IoError("error writing to stdout");
  } else {
    csv::write_file(path, content);
  }
}

std::vector<Condition> parse_condition_list(const std::string& text) {
  std::vector<Condition> out;
  if (text == "all") return {kAllConditions.begin(), kAllConditions.end()};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto name = std::string(detail::trim(item));
    if (name.empty()) continue;
    auto c = parse_condition(name);
    if (!c) throw ValidationError("unknown condition '" + name + "'");
    if (std::find(out.begin(), out.end(), *c) != out.end()) {
      throw ValidationError("condition '" + name + "' listed twice");
    }
    out.push_back(*c);
  }
  if (out.empty()) throw ValidationError("--conditions selects nothing");
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Condition> resolve_conditions(const Common& c, const Corpus& truth) {
  if (!c.conditions.empty()) return parse_condition_list(c.conditions);
  auto sel = select_evaluation_conditions(truth, c.min_positive);
  if (sel.empty()) {
    throw ValidationError("no condition has at least " + std::to_string(c.min_positive) +
                          " positive image labels; pass --conditions or --min-positive");
  }
  return sel;
}

void report_warnings(const Corpus& c) {
  if (c.warnings.empty()) return;
  std::cerr << "warning: " << c.warnings.size() << " ingestion warning(s); first: "
            << c.warnings.front() << "\n";
}

Corpus join(std::vector<Corpus> parts, const std::vector<std::string>& names) {
  auto r = join_corpora(parts);
  for (std::size_t k = 0; k < r.dropped.size(); ++k)
    if (r.dropped[k]) std::cerr << "note: " << r.dropped[k] << " study id(s) of " << names[k]
                                << " have no match and were dropped\n";
  report_warnings(r.corpus);
  return r.corpus;
}

Corpus load_reports_truth(const std::string& reports, const std::string& truth) {
  return join({ingest_report_labels(reports), ingest_image_truth(truth)}, {reports, truth});
}

void maybe_write_predictions(const std::string& path, const PredictionTable& p) {
  if (!path.empty()) csv::write_file(path, write_predictions(p));
}

Table single_column(const MetricsReport& r, const std::string& key) {
  const Column col{key, r.name};
  return table_from_reports(r.name, std::span(&r, 1), std::span(&col, 1));
}

Table bootstrap_table(const PairedBootstrapReport& b, std::span<const long> counts) {
  Table t;
  t.title = "Paired bootstrap F1 difference (a - b)";
  t.columns = {{"mean_diff", "Mean diff"}, {"ci_low", "CI low"}, {"ci_high", "CI high"}};
  for (std::size_t j = 0; j < b.conditions.size(); ++j) {
    const auto& r = b.per_condition[j];
    t.rows.push_back({std::string(condition_name(b.conditions[j])),
                      {r.mean_diff, r.ci_low, r.ci_high}, counts[j]});
  }
  t.rows.push_back({"Average", {b.macro.mean_diff, b.macro.ci_low, b.macro.ci_high}, std::nullopt});
  t.rows.push_back({"Weighted Average",
                    {b.weighted.mean_diff, b.weighted.ci_low, b.weighted.ci_high}, std::nullopt});
  return t;
}

/// Pulls `--config FILE` out of argv and appends the file's keys that the
/// invoked subcommand understands and that were not given explicitly.
std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ValidationError("--config needs a file path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  auto config = load_config(path);
  CLI::App* sub = nullptr;
  for (const auto& a : rest) {
    if (!a.empty() && a[0] != '-') {
      sub = app.get_subcommand_ptr(a).get();
      break;
    }
  }
  if (!sub) throw ValidationError("--config given without a command");
  ConfigMap known;
  for (const auto& [key, value] : config) {
    if (sub->get_option_no_throw("--" + key)) {
      known.emplace(key, value);
      continue;
    }
    bool elsewhere = false;
    for (auto* other : app.get_subcommands({}))
      if (other->get_option_no_throw("--" + key)) elsewhere = true;
    if (!elsewhere) throw ValidationError(path + ": unknown key '" + key + "'");
  }
  return merge_config_args(std::move(rest), known);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Map radiology report labels to image labels and evaluate the mappings"};
  app.require_subcommand(1);
  std::string config_path;  // consumed by apply_config before parsing
  app.add_option("--config", config_path, "key=value file; keys are option names of the command");

  // agreement ---------------------------------------------------------------
  Common agr;
  std::string agr_reports, agr_truth;
  auto* c_agr = app.add_subcommand("agreement", "Low/high F1 and kappa between report and image labels");
  c_agr->add_option("--reports", agr_reports, "Report label CSV")->required();
  c_agr->add_option("--truth", agr_truth, "Image truth CSV")->required();
  add_common(c_agr, agr);

  // disagreements -----------------------------------------------------------
  Common dis;
  std::string dis_reports, dis_truth;
  auto* c_dis = app.add_subcommand("disagreements", "Counts of report/image disagreements per condition");
  c_dis->add_option("--reports", dis_reports, "Report label CSV")->required();
  c_dis->add_option("--truth", dis_truth, "Image truth CSV")->required();
  add_common(c_dis, dis);

  // baseline-zero-one -------------------------------------------------------
  Common zo;
  std::string zo_reports, zo_truth, zo_preds;
  auto* c_zo = app.add_subcommand("baseline-zero-one", "Uncertain mapped to 0, to 1, and the better of both");
  c_zo->add_option("--reports", zo_reports, "Report label CSV")->required();
  c_zo->add_option("--truth", zo_truth, "Image truth CSV")->required();
  c_zo->add_option("--predictions-out", zo_preds, "Write best-per-condition predictions here");
  add_common(c_zo, zo);

  // baseline-logreg ---------------------------------------------------------
  Common lr;
  std::string lr_reports, lr_truth, lr_preds;
  double lr_c = 1.0;
  int lr_iter = 500;
  auto* c_lr = app.add_subcommand("baseline-logreg", "LOOCV logistic heads on one-hot report labels");
  c_lr->add_option("--reports", lr_reports, "Report label CSV")->required();
  c_lr->add_option("--truth", lr_truth, "Image truth CSV")->required();
  c_lr->add_option("--predictions-out", lr_preds, "Write LOOCV predictions here");
  c_lr->add_option("--c", lr_c, "Inverse L2 strength");
  c_lr->add_option("--max-iter", lr_iter, "Optimizer iteration cap");
  add_common(c_lr, lr);

  // odds-ratios -------------------------------------------------------------
  Common orr;
  std::string or_reports, or_truth;
  double or_alpha = 0.5, or_p = 0.05;
  auto* c_or = app.add_subcommand("odds-ratios", "Significant odds ratios of one-hot report labels");
  c_or->add_option("--reports", or_reports, "Report label CSV")->required();
  c_or->add_option("--truth", or_truth, "Image truth CSV")->required();
  c_or->add_option("--alpha", or_alpha, "L1 strength for feature selection");
  c_or->add_option("--p-threshold", or_p, "Keep features with p below this");
  add_common(c_or, orr);

  // calibrate-thresholds ----------------------------------------------------
  Common cal;
  std::string cal_probs, cal_truth;
  auto* c_cal = app.add_subcommand("calibrate-thresholds", "Youden-optimal probability thresholds (JSON)");
  c_cal->add_option("--probabilities", cal_probs, "Probability CSV")->required();
  c_cal->add_option("--truth", cal_truth, "Image truth CSV")->required();
  add_common(c_cal, cal);

  // train-student -----------------------------------------------------------
  Common ts;
  TrainConfig tcfg;
  std::string ts_impr, ts_probs, ts_history;
  auto* c_ts = app.add_subcommand("train-student", "Distill teacher probabilities into an n-gram student (JSON)");
  c_ts->add_option("--impressions", ts_impr, "Impressions CSV (study_id,impression)")->required();
  c_ts->add_option("--probabilities", ts_probs, "Teacher probability CSV")->required();
  c_ts->add_option("--learning-rate", tcfg.learning_rate);
  c_ts->add_option("--batch-size", tcfg.batch_size);
  c_ts->add_option("--split", tcfg.split_fraction, "Training fraction");
  c_ts->add_option("--patience", tcfg.patience);
  c_ts->add_option("--max-epochs", tcfg.max_epochs);
  c_ts->add_option("--max-ngram", tcfg.max_ngram);
  c_ts->add_option("--min-count", tcfg.min_count, "Minimum document frequency of an n-gram");
  c_ts->add_option("--history-out", ts_history, "Write per-epoch losses as CSV");
  add_common(c_ts, ts);

  // predict -----------------------------------------------------------------
  Common pr;
  std::string pr_model, pr_impr, pr_thresholds;
  auto* c_pr = app.add_subcommand("predict", "Student probabilities, or labels when thresholds are given");
  c_pr->add_option("--model", pr_model, "Student model JSON")->required();
  c_pr->add_option("--impressions", pr_impr, "Impressions CSV")->required();
  c_pr->add_option("--thresholds", pr_thresholds, "Threshold JSON; emit binary labels");
  add_common(c_pr, pr);

  // pipeline-visual ---------------------------------------------------------
  Common pv;
  std::string pv_probs, pv_truth, pv_model, pv_impr, pv_thresholds, pv_preds;
  auto* c_pv = app.add_subcommand("pipeline-visual",
                                  "LOOCV logistic heads on all 14 probabilities (or fixed thresholds)");
  c_pv->add_option("--probabilities", pv_probs, "Probability CSV");
  c_pv->add_option("--model", pv_model, "Student model JSON (with --impressions) instead of --probabilities");
  c_pv->add_option("--impressions", pv_impr, "Impressions CSV for --model");
  c_pv->add_option("--truth", pv_truth, "Image truth CSV")->required();
  c_pv->add_option("--thresholds", pv_thresholds, "Threshold JSON; score thresholding instead of heads");
  c_pv->add_option("--predictions-out", pv_preds, "Write predictions here");
  add_common(c_pv, pv);

  // compare -----------------------------------------------------------------
  Common cmp;
  std::string cmp_a, cmp_b, cmp_truth;
  int cmp_reps = 1000;
  double cmp_level = 0.95;
  auto* c_cmp = app.add_subcommand("compare", "Paired bootstrap of the F1 difference between two prediction files");
  c_cmp->add_option("--a", cmp_a, "Predictions CSV (first system)")->required();
  c_cmp->add_option("--b", cmp_b, "Predictions CSV (second system)")->required();
  c_cmp->add_option("--truth", cmp_truth, "Image truth CSV")->required();
  c_cmp->add_option("--replicates", cmp_reps);
  c_cmp->add_option("--level", cmp_level, "Confidence level");
  add_common(c_cmp, cmp);

  // synth -------------------------------------------------------------------
  Common sy;
  std::string sy_preset = "chexpert-like", sy_dir;
  std::size_t sy_n = 500;
  auto* c_sy = app.add_subcommand("synth", "Write a synthetic corpus (four CSV files)");
  c_sy->add_option("--preset", sy_preset)->check(CLI::IsMember({"chexpert-like", "noiseless"}));
  c_sy->add_option("--n", sy_n, "Number of studies");
  c_sy->add_option("--out-dir", sy_dir, "Directory for the CSV files")->required();
  add_common(c_sy, sy);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }

  try {
    if (*c_agr) {
      auto corpus = load_reports_truth(agr_reports, agr_truth);
      auto conds = resolve_conditions(agr, corpus);
      auto bounds = agreement_bounds(corpus, conds);
      auto counts = positive_counts(corpus, conds);
      Table t;
      t.title = "Agreement between report labels and image labels";
      t.columns = {{"low_f1", "Low F1"}, {"high_f1", "High F1"}, {"low_kappa", "Low Kappa"},
                   {"high_kappa", "High Kappa"}};
      std::vector<double> lf, hf, lk, hk;
      for (std::size_t j = 0; j < conds.size(); ++j) {
        const auto& b = bounds[j];
        t.rows.push_back({std::string(condition_name(b.condition)),
                          {b.low_f1, b.high_f1, b.low_kappa, b.high_kappa}, counts[j]});
        lf.push_back(b.low_f1);
        hf.push_back(b.high_f1);
        lk.push_back(b.low_kappa);
        hk.push_back(b.high_kappa);
      }
      std::vector<double> w(counts.begin(), counts.end());
      t.rows.push_back({"Average",
                        {macro_average(lf), macro_average(hf), macro_average(lk), macro_average(hk)},
                        std::nullopt});
      t.rows.push_back({"Weighted Average",
                        {weighted_average(lf, w), weighted_average(hf, w), weighted_average(lk, w),
                         weighted_average(hk, w)},
                        std::nullopt});
      write_output(agr.out, emit(t, parse_format(agr.format)));
    } else if (*c_dis) {
      auto corpus = load_reports_truth(dis_reports, dis_truth);
      auto conds = dis.conditions.empty() ? std::vector<Condition>(kAllConditions.begin(), kAllConditions.end())
                                          : parse_condition_list(dis.conditions);
      auto all = disagreement_counts(corpus);
      auto counts = positive_counts(corpus);
      Table t;
      t.title = "Report/image disagreements (uncertain report labels excluded)";
      t.columns = {{"pos_image_neg_report", "Positive image, negative report", true},
                   {"neg_image_pos_report", "Negative image, positive report", true}};
      for (auto c : conds) {
        const auto& d = all[ordinal(c)];
        t.rows.push_back({std::string(condition_name(c)),
                          {static_cast<double>(d.pos_image_neg_report),
                           static_cast<double>(d.neg_image_pos_report)},
                          counts[ordinal(c)]});
      }
      write_output(dis.out, emit(t, parse_format(dis.format)));
    } else if (*c_zo) {
      auto corpus = load_reports_truth(zo_reports, zo_truth);
      auto conds = resolve_conditions(zo, corpus);
      auto r = zero_one_baseline(corpus, conds);
      const std::vector<MetricsReport> reps{r.zeros, r.ones, r.best};
      const std::vector<Column> cols{{"zeros", "Zeros"}, {"ones", "Ones"}, {"best", "Best of both"}};
      write_output(zo.out, emit(table_from_reports("Zero-One baseline F1", reps, cols),
                                parse_format(zo.format)));
      maybe_write_predictions(zo_preds, r.best_predictions);
    } else if (*c_lr) {
      auto corpus = load_reports_truth(lr_reports, lr_truth);
      auto conds = resolve_conditions(lr, corpus);
      HeadSettings hs;
      hs.penalty = Penalty::l2(lr_c);
      hs.options.max_iter = lr_iter;
      auto p = logreg_baseline(corpus, conds, hs);
      auto r = score_predictions("LogReg baseline F1", p, corpus);
      write_output(lr.out, emit(single_column(r, "f1"), parse_format(lr.format)));
      maybe_write_predictions(lr_preds, p);
    } else if (*c_or) {
      auto corpus = load_reports_truth(or_reports, or_truth);
      auto conds = resolve_conditions(orr, corpus);
      auto x = one_hot_matrix(corpus);
      auto names = one_hot_feature_names();
      RecordTable t;
      char title[64];
      std::snprintf(title, sizeof title, "Odds ratios (p < %g)", or_p);
      t.title = title;
      t.columns = {"condition", "feature", "odds_ratio", "coefficient", "std_error", "z", "p_value"};
      for (auto c : conds) {
        auto table = odds_ratio_table(x, corpus.truth_column(c), names, or_alpha, or_p);
        for (const auto& e : table.entries) {
          t.rows.push_back({std::string(condition_name(c)), e.feature_name, e.odds_ratio,
                            e.coefficient, e.std_error, e.statistic, e.p_value});
        }
      }
      write_output(orr.out, emit(t, parse_format(orr.format)));
    } else if (*c_cal) {
      auto corpus = join({ingest_probabilities(cal_probs), ingest_image_truth(cal_truth)},
                         {cal_probs, cal_truth});
      auto conds = resolve_conditions(cal, corpus);
      write_output(cal.out, to_json_doc(youden_thresholds(corpus, conds)).dump(2) + "\n");
    } else if (*c_ts) {
      auto corpus = join({ingest_impressions(ts_impr), ingest_probabilities(ts_probs)},
                         {ts_impr, ts_probs});
      tcfg.seed = ts.seed;
      auto result = train_student(corpus, tcfg);
      std::cerr << "trained " << result.history.epochs_run << " epoch(s); best epoch "
                << result.history.best_epoch << "; vocabulary "
                << result.model.vocabulary.size() << "\n";
      write_output(ts.out, to_json_doc(result.model, tcfg).dump(2) + "\n");
      if (!ts_history.empty()) {
        std::string h = "epoch,train_loss,val_loss\n";
        for (std::size_t e = 0; e < result.history.train_loss.size(); ++e) {
          h += std::to_string(e) + "," + format_real(result.history.train_loss[e]) + "," +
               format_real(result.history.val_loss[e]) + "\n";
        }
        csv::write_file(ts_history, h);
      }
    } else if (*c_pr) {
      auto model = student_model_from_json(parse_json_document(csv::read_file(pr_model), pr_model));
      auto corpus = ingest_impressions(pr_impr);
      for (auto& s : corpus.studies) s.probabilities = predict_student(model, *s.impression);
      if (pr_thresholds.empty()) {
        write_output(pr.out, write_probabilities(corpus));
      } else {
        auto th = threshold_set_from_json(
            parse_json_document(csv::read_file(pr_thresholds), pr_thresholds));
        auto conds = pr.conditions.empty()
                         ? std::vector<Condition>(kAllConditions.begin(), kAllConditions.end())
                         : parse_condition_list(pr.conditions);
        write_output(pr.out, write_predictions(threshold_pipeline(corpus, th, conds)));
      }
    } else if (*c_pv) {
      Corpus probs;
      if (!pv_probs.empty() == !pv_model.empty()) {
        throw ValidationError("pipeline-visual needs exactly one of --probabilities or --model");
      }
      if (!pv_model.empty()) {
        if (pv_impr.empty()) throw ValidationError("--model needs --impressions");
        auto model = student_model_from_json(parse_json_document(csv::read_file(pv_model), pv_model));
        probs = ingest_impressions(pv_impr);
        for (auto& s : probs.studies) s.probabilities = predict_student(model, *s.impression);
      } else {
        probs = ingest_probabilities(pv_probs);
      }
      auto corpus = join({std::move(probs), ingest_image_truth(pv_truth)},
                         {pv_model.empty() ? pv_probs : pv_impr, pv_truth});
      auto conds = resolve_conditions(pv, corpus);
      PredictionTable p;
      std::string name;
      if (pv_thresholds.empty()) {
        p = visual_pipeline(corpus, conds);
        name = "Probability LogReg heads F1";
      } else {
        auto th = threshold_set_from_json(
            parse_json_document(csv::read_file(pv_thresholds), pv_thresholds));
        p = threshold_pipeline(corpus, th, conds);
        name = "Probability thresholding F1";
      }
      auto r = score_predictions(name, p, corpus);
      write_output(pv.out, emit(single_column(r, "f1"), parse_format(pv.format)));
      maybe_write_predictions(pv_preds, p);
    } else if (*c_cmp) {
      auto truth = ingest_image_truth(cmp_truth);
      auto a = parse_predictions(csv::read_file(cmp_a), cmp_a);
      auto b = parse_predictions(csv::read_file(cmp_b), cmp_b);
      std::vector<Condition> conds;
      if (!cmp.conditions.empty()) {
        conds = parse_condition_list(cmp.conditions);
      } else {
        for (auto c : a.conditions)
          if (std::find(b.conditions.begin(), b.conditions.end(), c) != b.conditions.end())
            conds.push_back(c);
        std::sort(conds.begin(), conds.end());
        if (conds.empty()) throw ValidationError("the prediction files share no condition");
      }
      auto rep = compare_predictions(a, b, truth, conds, cmp_reps, cmp_level, cmp.seed);
      auto counts = positive_counts(truth, conds);
      write_output(cmp.out, emit(bootstrap_table(rep, counts), parse_format(cmp.format)));
    } else if (*c_sy) {
      auto spec = sy_preset == "noiseless" ? noiseless_spec() : chexpert_like_spec();
      auto corpus = generate_synthetic_corpus(spec, sy_n, sy.seed);
      std::error_code ec;
      fs::create_directories(sy_dir, ec);
      if (ec) throw IoError("cannot create '" + sy_dir + "': " + ec.message());
      const fs::path dir(sy_dir);
      csv::write_file(dir / "report_labels.csv", write_report_labels(corpus));
      csv::write_file(dir / "image_truth.csv", write_image_truth(corpus));
      csv::write_file(dir / "probabilities.csv", write_probabilities(corpus));
      csv::write_file(dir / "impressions.csv", write_impressions(corpus));
      std::cerr << "wrote " << corpus.size() << " studies to " << sy_dir << "\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
