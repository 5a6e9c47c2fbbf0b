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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpmix/decoder.h"
#include "dpmix/ensemble.h"

namespace dpmix {

// Which distribution the per-query negative log-likelihood is measured
// against: the one the token was actually sampled from (public on a failed
// screen), or always the projected-ensemble average.
enum class PplMode { kSampled, kProjected };

struct TrainShardsOptions {
  std::string corpus_path;
  // True: corpus_path is a file with one document per non-empty line.
  // False: corpus_path is a directory with one document per file, or a
  // single file holding one document.
  bool docs_per_line = true;
  std::size_t n_shards = 1;
  int order = 3;
  double smoothing = 0.1;
  std::uint64_t seed = 0;
  // Fraction of documents held out to train the public model.
  double public_fraction = 0.2;
  TokenMode token_mode = TokenMode::kChar;
  std::string out_dir;
};

// Splits the corpus into a public set and n_shards pairwise-disjoint private
// shards, trains one model per shard plus the public model, and persists
// them with a manifest under out_dir. Validates everything before writing,
// so a failed run leaves no partial output.
void run_train_shards(const TrainShardsOptions& options);

struct ModelSet {
  Vocabulary vocab;
  NGramModel public_model;
  std::vector<NGramModel> private_models;
};

// Loads public.json plus the first ensemble_size shard models (0 = all).
// All models must share one vocabulary.
ModelSet load_models(const std::string& models_dir, std::size_t ensemble_size = 0);

struct EvalReport {
  double perplexity = 0.0;
  std::size_t queries_answered = 0;
  std::size_t queries_screened_out = 0;
  double eps_rdp_final = 0.0;
  double eps_dp_final = 0.0;
  double utility_gap_bound = 0.0;
  // JSON snapshot of the DecodingConfig the run used.
  std::string config_snapshot;
};

struct DecodeOptions {
  std::string models_dir;
  std::string eval_path;
  DecodingConfig config;
  std::string ledger_path;  // empty: no ledger file
  std::string report_path;  // empty: no report file
  std::size_t max_queries = 0;  // 0: the whole eval stream
  PplMode ppl_mode = PplMode::kSampled;
};

// Runs one decoding session over the eval text: one next-token query per
// position, adaptive or baseline per the config. Writes the per-query
// ledger and the report when paths are given.
EvalReport run_decode(const DecodeOptions& options);

struct EvaluateResult {
  double public_ppl = 0.0;
  std::vector<double> private_ppl;
  // Perplexity of the unprojected ensemble average (all mixing weights 1).
  double ensemble_avg_ppl = 0.0;
  std::size_t queries = 0;
};

EvaluateResult run_evaluate(const std::string& models_dir,
                            const std::string& eval_path,
                            std::size_t max_queries = 0);

struct SweepSpec {
  // One of: threshold, top_k, beta, ensemble_size, screen_lambda_sigma,
  // alpha. screen_lambda_sigma values are "lambda:sigma" pairs.
  std::string parameter;
  std::vector<std::string> values;
};

struct SweepRow {
  std::string value;
  double eps_rdp;
  double eps_dp;
  double ppl;
  std::size_t screened_out;
};

// One decode run per value over a fixed base config. Sequential runs share
// the base seed; parallel runs each get a seed derived from their index and
// an isolated in-memory ledger. Results land in out_csv in value order; a
// failed run leaves the CSV flagged invalid.
std::vector<SweepRow> run_sweep(const SweepSpec& spec,
                                const DecodingConfig& base_config,
                                const std::string& models_dir,
                                const std::string& eval_path,
                                const std::string& out_csv,
                                std::size_t max_queries = 0,
                                bool parallel = false);

struct AccountMismatch {
  std::size_t line;  // 1-based line number in the ledger file
  std::string field;
  double stored;
  double recomputed;
};

struct AccountResult {
  double eps_rdp = 0.0;
  double eps_dp = 0.0;
  std::size_t entries = 0;
  double alpha = 0.0;
  double delta = 0.0;
  std::vector<AccountMismatch> mismatches;
};

// Replays a ledger file: re-sums the per-query losses in order, checks every
// stored running total bit-for-bit, and re-derives the DP guarantee. alpha
// and delta default to the ledger header's values.
AccountResult run_account(const std::string& ledger_path,
                          std::optional<double> alpha = std::nullopt,
                          std::optional<double> delta = std::nullopt);

// Flat key = value decode configuration. Keys: alpha, beta, N, sigma,
// lambda, T, top_k, delta, mode, seed; baseline mode adds eps_budget,
// query_budget, subsample_q; optional symmetric_screening. T accepts "inf"
// and "-inf". '#' starts a comment. Errors name the offending key.
DecodingConfig parse_decode_config(const std::string& text);
DecodingConfig load_decode_config(const std::string& path);

// JSON snapshot of a config, inverse of parse_decode_config's key set.
std::string config_to_json(const DecodingConfig& config);

// Corpus ingestion helper shared by the train and evaluate paths.
std::vector<std::string> read_documents(const std::string& path, bool docs_per_line);

}  // namespace dpmix
