//
// Copyright 2026 The dpmix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "dpmix/harness.h"

namespace {

using json = nlohmann::ordered_json;

struct TrainArgs {
  dpmix::TrainShardsOptions options;
  std::string token_mode = "char";
  bool doc_per_file = false;
};

struct DecodeArgs {
  std::string models_dir;
  std::string eval_path;
  std::string config_path;
  std::string ledger_out;
  std::string report_out;
  std::size_t max_queries = 0;
  std::string ppl_mode = "sampled";
};

struct SweepArgs {
  std::string param;
  std::vector<std::string> values;
  std::string config_path;
  std::string models_dir;
  std::string eval_path;
  std::string out_csv;
  std::size_t max_queries = 0;
  bool parallel = false;
};

struct AccountArgs {
  std::string ledger_path;
  double alpha = 0.0;
  double delta = 0.0;
  bool has_alpha = false;
  bool has_delta = false;
};

dpmix::TokenMode parse_token_mode(const std::string& name) {
  if (name == "char") return dpmix::TokenMode::kChar;
  if (name == "word") return dpmix::TokenMode::kWord;
  throw std::invalid_argument("token mode must be 'char' or 'word', got '" + name + "'");
}

int run_train(TrainArgs& args) {
  args.options.token_mode = parse_token_mode(args.token_mode);
  args.options.docs_per_line = !args.doc_per_file;
  dpmix::run_train_shards(args.options);
  json out;
  out["status"] = "ok";
  out["out_dir"] = args.options.out_dir;
  out["n_shards"] = args.options.n_shards;
  std::cout << out.dump() << "\n";
  return 0;
}

int run_decode_cmd(const DecodeArgs& args) {
  dpmix::PplMode ppl_mode;
  if (args.ppl_mode == "sampled") {
    ppl_mode = dpmix::PplMode::kSampled;
  } else if (args.ppl_mode == "projected") {
    ppl_mode = dpmix::PplMode::kProjected;
  } else {
    throw std::invalid_argument("--ppl-mode must be 'sampled' or 'projected'");
  }
  const dpmix::DecodeOptions options{.models_dir = args.models_dir,
                                     .eval_path = args.eval_path,
                                     .config = dpmix::load_decode_config(args.config_path),
                                     .ledger_path = args.ledger_out,
                                     .report_path = args.report_out,
                                     .max_queries = args.max_queries,
                                     .ppl_mode = ppl_mode};
  const dpmix::EvalReport report = dpmix::run_decode(options);
  json out;
  out["perplexity"] = report.perplexity;
  out["queries_answered"] = report.queries_answered;
  out["queries_screened_out"] = report.queries_screened_out;
  out["eps_rdp_final"] = report.eps_rdp_final;
  out["eps_dp_final"] = report.eps_dp_final;
  out["utility_gap_bound"] = report.utility_gap_bound;
  std::cout << out.dump() << "\n";
  return 0;
}

int run_evaluate_cmd(const std::string& models_dir, const std::string& eval_path,
                     std::size_t max_queries) {
  const dpmix::EvaluateResult result =
      dpmix::run_evaluate(models_dir, eval_path, max_queries);
  json out;
  out["queries"] = result.queries;
  out["public_ppl"] = result.public_ppl;
  out["private_ppl"] = result.private_ppl;
  out["ensemble_avg_ppl"] = result.ensemble_avg_ppl;
  std::cout << out.dump() << "\n";
  return 0;
}

int run_sweep_cmd(const SweepArgs& args) {
  dpmix::SweepSpec spec;
  spec.parameter = args.param;
  spec.values = args.values;
  const dpmix::DecodingConfig base = dpmix::load_decode_config(args.config_path);
  dpmix::run_sweep(spec, base, args.models_dir, args.eval_path, args.out_csv,
                   args.max_queries, args.parallel);
  json out;
  out["status"] = "ok";
  out["csv"] = args.out_csv;
  out["runs"] = args.values.size();
  std::cout << out.dump() << "\n";
  return 0;
}

int run_account_cmd(const AccountArgs& args) {
  std::optional<double> alpha, delta;
  if (args.has_alpha) alpha = args.alpha;
  if (args.has_delta) delta = args.delta;
  const dpmix::AccountResult result = dpmix::run_account(args.ledger_path, alpha, delta);
  json out;
  out["eps_rdp"] = result.eps_rdp;
  out["eps_dp"] = result.eps_dp;
  out["entries"] = result.entries;
  out["alpha"] = result.alpha;
  out["delta"] = result.delta;
  json mismatches = json::array();
  for (const dpmix::AccountMismatch& m : result.mismatches) {
    json e;
    e["line"] = m.line;
    e["field"] = m.field;
    e["stored"] = m.stored;
    e["recomputed"] = m.recomputed;
    mismatches.push_back(std::move(e));
  }
  out["mismatches"] = std::move(mismatches);
  std::cout << out.dump() << "\n";
  return result.mismatches.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private next-token decoding over model ensembles"};
  app.require_subcommand(1);

  TrainArgs train;
  CLI::App* train_cmd =
      app.add_subcommand("train-shards", "Partition a corpus and train shard models");
  train_cmd->add_option("--corpus", train.options.corpus_path, "Corpus file or directory")
      ->required();
  train_cmd->add_option("--shards", train.options.n_shards, "Number of private shards")
      ->required();
  train_cmd->add_option("--order", train.options.order, "N-gram order (default 3)");
  train_cmd->add_option("--smoothing", train.options.smoothing,
                        "Additive smoothing (default 0.1)");
  train_cmd->add_option("--seed", train.options.seed, "Partition seed (default 0)");
  train_cmd->add_option("--public-fraction", train.options.public_fraction,
                        "Documents held out for the public model (default 0.2)");
  train_cmd->add_option("--token-mode", train.token_mode, "char or word (default char)");
  train_cmd->add_flag("--doc-per-file", train.doc_per_file,
                      "Treat the corpus path as one document per file instead of "
                      "one document per line");
  train_cmd->add_option("--out", train.options.out_dir, "Output model directory")
      ->required();

  DecodeArgs decode;
  CLI::App* decode_cmd = app.add_subcommand("decode", "Run a decoding session");
  decode_cmd->add_option("--models", decode.models_dir, "Model directory")->required();
  decode_cmd->add_option("--eval", decode.eval_path, "Eval text (one document per line)")
      ->required();
  decode_cmd->add_option("--config", decode.config_path, "Decode config file")->required();
  decode_cmd->add_option("--ledger", decode.ledger_out, "Ledger output path (JSONL)");
  decode_cmd->add_option("--report", decode.report_out, "Report output path (JSON)");
  decode_cmd->add_option("--max-queries", decode.max_queries, "Query cap (0 = all)");
  decode_cmd->add_option("--ppl-mode", decode.ppl_mode,
                         "'sampled' (default) or 'projected' likelihood");

  std::string eval_models, eval_path;
  std::size_t eval_max = 0;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "Per-model perplexities on an eval text");
  evaluate_cmd->add_option("--models", eval_models, "Model directory")->required();
  evaluate_cmd->add_option("--eval", eval_path, "Eval text")->required();
  evaluate_cmd->add_option("--max-queries", eval_max, "Query cap (0 = all)");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Decode once per parameter value");
  sweep_cmd->add_option("--param", sweep.param,
                        "threshold | top_k | beta | ensemble_size | "
                        "screen_lambda_sigma | alpha")
      ->required();
  sweep_cmd->add_option("--values", sweep.values, "Values to sweep")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--config", sweep.config_path, "Base decode config")->required();
  sweep_cmd->add_option("--models", sweep.models_dir, "Model directory")->required();
  sweep_cmd->add_option("--eval", sweep.eval_path, "Eval text")->required();
  sweep_cmd->add_option("--out", sweep.out_csv, "Output CSV path")->required();
  sweep_cmd->add_option("--max-queries", sweep.max_queries, "Query cap per run (0 = all)");
  sweep_cmd->add_flag("--parallel", sweep.parallel,
                      "Run values concurrently with derived seeds");

  AccountArgs account;
  CLI::App* account_cmd =
      app.add_subcommand("account", "Replay a ledger and re-derive the DP guarantee");
  account_cmd->add_option("--ledger", account.ledger_path, "Ledger file")->required();
  CLI::Option* alpha_opt =
      account_cmd->add_option("--alpha", account.alpha, "Override the header order");
  CLI::Option* delta_opt =
      account_cmd->add_option("--delta", account.delta, "Override the header delta");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return run_train(train);
    if (decode_cmd->parsed()) return run_decode_cmd(decode);
    if (evaluate_cmd->parsed()) return run_evaluate_cmd(eval_models, eval_path, eval_max);
    if (sweep_cmd->parsed()) return run_sweep_cmd(sweep);
    if (account_cmd->parsed()) {
      account.has_alpha = alpha_opt->count() > 0;
      account.has_delta = delta_opt->count() > 0;
      return run_account_cmd(account);
    }
  } catch (const std::exception& e) {
    json err;
    err["error"] = true;
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
