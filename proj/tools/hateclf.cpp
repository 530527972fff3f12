// Command-line front end: stats, train, predict, evaluate, run.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hateclf/config.hpp"
#include "hateclf/error.hpp"
#include "hateclf/eval.hpp"
#include "hateclf/experiment.hpp"

namespace fs = std::filesystem;
using namespace hateclf;

namespace {

struct ExperimentFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
  bool quiet = false;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--config,-c", f.config, "Experiment config file (key = value lines)");
  cmd->add_option("--seed", f.seed, "Overrides the config seed");
  cmd->add_option("--out,-o", f.out, "Overrides the output directory");
  cmd->add_option("--set", f.sets, "Overrides any config key, as key=value")->take_all();
  cmd->add_flag("--quiet,-q", f.quiet, "Do not echo the training log");
}

ExperimentConfig resolve(const ExperimentFlags& f) {
  ConfigValues values;
  if (!f.config.empty()) values = read_config_file(f.config);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Config, "--set expects key=value, got '" + s + "'");
    }
    values[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (f.seed) values["seed"] = std::to_string(*f.seed);
  if (!f.out.empty()) values["out"] = f.out;
  return resolve_config(values);
}

ColumnNames columns_from(const std::string& id, const std::string& text, const std::string& bin,
                         const std::string& fine) {
  ColumnNames c;
  c.id = id;
  c.text = text;
  c.binary = bin;
  c.fine = fine;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hate-speech text classification: training, prediction and evaluation"};
  app.require_subcommand(1);

  std::string id_col = "tweet_id", text_col = "text", bin_col = "task_1", fine_col = "task_2";
  auto add_columns = [&](CLI::App* cmd) {
    cmd->add_option("--id-column", id_col, "Id column name")->capture_default_str();
    cmd->add_option("--text-column", text_col, "Text column name")->capture_default_str();
    cmd->add_option("--binary-column", bin_col, "Binary label column")->capture_default_str();
    cmd->add_option("--fine-column", fine_col, "Fine-grained label column")->capture_default_str();
  };

  auto* stats = app.add_subcommand("stats", "Class distribution and text length of a data file");
  std::string stats_data;
  std::string stats_scheme = "binary";
  stats->add_option("data", stats_data, "Data file (TSV/CSV)")->required();
  stats->add_option("--scheme", stats_scheme, "binary, fine or ternary")->capture_default_str();
  add_columns(stats);

  ExperimentFlags train_flags;
  auto* train = app.add_subcommand("train", "Train and save a model without evaluation");
  add_experiment_flags(train, train_flags);

  ExperimentFlags run_flags;
  auto* run = app.add_subcommand("run", "Full experiment: train, predict, evaluate, report");
  add_experiment_flags(run, run_flags);

  auto* pred = app.add_subcommand("predict", "Label a data file with a saved model");
  std::string pred_model, pred_input, pred_out;
  pred->add_option("--model,-m", pred_model, "Saved model directory")->required();
  pred->add_option("--input,-i", pred_input, "Data file with id and text columns")->required();
  pred->add_option("--out,-o", pred_out, "Output TSV (id<TAB>label)")->required();
  add_columns(pred);

  auto* evaluate = app.add_subcommand("evaluate", "Score a prediction file against gold labels");
  std::string ev_gold, ev_pred, ev_scheme = "binary", ev_image, ev_json;
  evaluate->add_option("--gold,-g", ev_gold, "Gold labels (id<TAB>label or data file)")->required();
  evaluate->add_option("--pred,-p", ev_pred, "Predictions (id<TAB>label)")->required();
  evaluate->add_option("--scheme", ev_scheme, "binary, fine or ternary")->capture_default_str();
  evaluate->add_option("--image", ev_image, "Confusion matrix image (.png or .svg)");
  evaluate->add_option("--json", ev_json, "Write the metrics JSON here");
  add_columns(evaluate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_code::kOk : exit_code::kConfig;
  }

  try {
    const ColumnNames columns = columns_from(id_col, text_col, bin_col, fine_col);
    if (*stats) {
      const auto st = ingest_stats(stats_data, scheme_kind_from_string(stats_scheme), columns);
      std::cout << st.to_text();
    } else if (*train || *run) {
      const ExperimentFlags& f = *train ? train_flags : run_flags;
      const ExperimentConfig cfg = resolve(f);
      const RunOutcome r = run_experiment(cfg, f.quiet ? nullptr : &std::cout,
                                          *train ? RunMode::TrainOnly : RunMode::Full);
      std::cout << "run directory: " << r.dir.string() << "\n";
    } else if (*pred) {
      const auto n = predict_file(pred_model, pred_input, pred_out, columns);
      std::cout << "predicted " << n << " examples -> " << pred_out << "\n";
    } else if (*evaluate) {
      const LabelScheme scheme = LabelScheme::of(scheme_kind_from_string(ev_scheme));
      const Evaluation ev = evaluate_files(ev_gold, ev_pred, scheme, columns);
      std::cout << format_report(ev.report) << ev.confusion.to_text();
      if (!ev_json.empty()) {
        std::ofstream out(ev_json, std::ios::binary);
        if (!out) throw Error(ErrorKind::Io, "cannot write '" + ev_json + "'");
        out << report_to_json(ev.report);
      }
      if (!ev_image.empty()) render_confusion_matrix(ev.confusion, ev_image);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::kUnknown;
  }
  return exit_code::kOk;
}
