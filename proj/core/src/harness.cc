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

#include "dpmix/harness.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dpmix/projection.h"

namespace dpmix {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr int kLedgerFormatVersion = 1;
constexpr int kManifestFormatVersion = 1;
constexpr int kReportFormatVersion = 1;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string digest_hex(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return std::string(buf);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

double parse_strict_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' has invalid numeric value '" +
                                value + "'");
  }
}

std::uint64_t parse_strict_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' has invalid integer value '" +
                                value + "'");
  }
}

double parse_extended_real(const std::string& key, const std::string& value) {
  if (value == "inf") return std::numeric_limits<double>::infinity();
  if (value == "-inf") return -std::numeric_limits<double>::infinity();
  return parse_strict_double(key, value);
}

// Threshold values may be infinite; JSON has no literal for that.
json threshold_to_json(double t) {
  if (std::isinf(t)) return t > 0 ? json("inf") : json("-inf");
  return json(t);
}

double threshold_from_json(const json& j) {
  if (j.is_string()) {
    return parse_extended_real("T", j.get<std::string>());
  }
  return j.get<double>();
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Eval text is consumed one document per line so that queries never span
// document boundaries (and, in char mode, never hit the line separator).
std::vector<TokenSeq> read_eval_documents(const std::string& path,
                                          const Vocabulary& vocab) {
  std::vector<TokenSeq> docs;
  for (const std::string& doc : read_documents(path, /*docs_per_line=*/true)) {
    TokenSeq tokens = vocab.encode(doc);
    if (tokens.size() >= 2) docs.push_back(std::move(tokens));
  }
  if (docs.empty()) {
    throw std::runtime_error(path + ": no evaluable documents (need >= 2 tokens each)");
  }
  return docs;
}

struct QueryStream {
  const std::vector<TokenSeq>& docs;
  std::size_t limit;  // 0: unlimited

  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::size_t qi = 0;
    for (const TokenSeq& doc : docs) {
      for (std::size_t t = 1; t < doc.size(); ++t) {
        if (limit != 0 && qi >= limit) return;
        fn(qi, std::span<const std::int32_t>(doc.data(), t), doc[t]);
        ++qi;
      }
    }
  }
};

std::string shard_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "shard_%04zu.json", i);
  return std::string(buf);
}

DecodingConfig apply_sweep_value(const DecodingConfig& base, const std::string& parameter,
                                 const std::string& value) {
  DecodingConfig cfg = base;
  if (parameter == "threshold") {
    cfg.screening.threshold = parse_extended_real("threshold", value);
  } else if (parameter == "top_k") {
    cfg.screening.top_k = parse_strict_u64("top_k", value);
  } else if (parameter == "beta") {
    cfg.beta = parse_strict_double("beta", value);
  } else if (parameter == "ensemble_size") {
    cfg.ensemble_size = parse_strict_u64("ensemble_size", value);
  } else if (parameter == "screen_lambda_sigma") {
    const auto colon = value.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument(
          "sweep: screen_lambda_sigma values must look like 'lambda:sigma'");
    }
    cfg.screening.lambda_screen = parse_strict_double("lambda", value.substr(0, colon));
    cfg.screening.sigma = parse_strict_double("sigma", value.substr(colon + 1));
  } else if (parameter == "alpha") {
    const RenyiOrder order(parse_strict_double("alpha", value));
    cfg.alpha = order;
    cfg.screening.alpha = order;
  } else {
    throw std::invalid_argument("sweep: unknown parameter '" + parameter + "'");
  }
  return cfg;
}

}  // namespace

std::vector<std::string> read_documents(const std::string& path, bool docs_per_line) {
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<std::string> docs;
    for (const fs::path& file : files) docs.push_back(read_text_file(file.string()));
    return docs;
  }
  const std::string content = read_text_file(path);
  if (!docs_per_line) return {content};
  std::vector<std::string> docs;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) docs.push_back(line);
  }
  return docs;
}

void run_train_shards(const TrainShardsOptions& options) {
  if (options.n_shards == 0) {
    throw std::invalid_argument("train-shards: n_shards must be positive");
  }
  if (!(options.public_fraction > 0.0 && options.public_fraction < 1.0)) {
    throw std::invalid_argument("train-shards: public_fraction must be in (0, 1)");
  }
  const std::vector<std::string> raw_docs =
      read_documents(options.corpus_path, options.docs_per_line);
  if (raw_docs.empty()) {
    throw std::runtime_error("train-shards: corpus has no documents");
  }
  const Vocabulary vocab = Vocabulary::build(raw_docs, options.token_mode);
  std::vector<TokenSeq> token_docs;
  token_docs.reserve(raw_docs.size());
  for (const std::string& doc : raw_docs) token_docs.push_back(vocab.encode(doc));

  const std::size_t total = token_docs.size();
  std::size_t public_count = static_cast<std::size_t>(
      std::llround(options.public_fraction * static_cast<double>(total)));
  public_count = std::clamp<std::size_t>(public_count, 1, total - 1);
  if (total - public_count < options.n_shards) {
    throw std::invalid_argument(
        "train-shards: " + std::to_string(total - public_count) +
        " private documents cannot fill " + std::to_string(options.n_shards) + " shards");
  }

  std::vector<std::size_t> ids(total);
  for (std::size_t i = 0; i < total; ++i) ids[i] = i;
  Rng split_rng = Rng::derive(options.seed, 0);
  split_rng.shuffle(ids);
  std::vector<std::size_t> public_ids(ids.begin(),
                                      ids.begin() + static_cast<std::ptrdiff_t>(public_count));
  std::vector<std::size_t> private_ids(ids.begin() + static_cast<std::ptrdiff_t>(public_count),
                                       ids.end());
  std::sort(public_ids.begin(), public_ids.end());
  std::sort(private_ids.begin(), private_ids.end());

  std::vector<TokenSeq> public_docs;
  for (std::size_t id : public_ids) public_docs.push_back(token_docs[id]);
  std::vector<TokenSeq> private_docs;
  for (std::size_t id : private_ids) private_docs.push_back(token_docs[id]);

  const ShardedCorpus sharded =
      partition_corpus(private_docs, options.n_shards, Rng::derive(options.seed, 1).seed());

  // Train everything before touching the filesystem.
  const NGramModel public_model =
      NGramModel::train(public_docs, options.order, options.smoothing, vocab);
  std::vector<NGramModel> shard_models;
  shard_models.reserve(options.n_shards);
  for (const auto& shard : sharded.shards) {
    shard_models.push_back(NGramModel::train(shard, options.order, options.smoothing, vocab));
  }

  fs::create_directories(options.out_dir);
  const fs::path out_dir(options.out_dir);
  public_model.save((out_dir / "public.json").string());
  for (std::size_t i = 0; i < shard_models.size(); ++i) {
    shard_models[i].save((out_dir / shard_file_name(i)).string());
  }

  json manifest;
  manifest["format"] = "dpmix-manifest";
  manifest["version"] = kManifestFormatVersion;
  manifest["n_shards"] = options.n_shards;
  manifest["order"] = options.order;
  manifest["smoothing"] = options.smoothing;
  manifest["seed"] = options.seed;
  manifest["token_mode"] = options.token_mode == TokenMode::kChar ? "char" : "word";
  manifest["corpus_documents"] = total;
  manifest["public_documents"] = public_ids;
  json shards = json::array();
  for (std::size_t i = 0; i < sharded.shard_manifest.size(); ++i) {
    std::vector<std::size_t> original;
    for (std::size_t local : sharded.shard_manifest[i]) original.push_back(private_ids[local]);
    std::sort(original.begin(), original.end());
    shards.push_back(original);
  }
  manifest["shards"] = std::move(shards);
  std::ofstream out(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest.json");
  out << manifest.dump(2) << "\n";
}

ModelSet load_models(const std::string& models_dir, std::size_t ensemble_size) {
  const fs::path dir(models_dir);
  const json manifest = json::parse(read_text_file((dir / "manifest.json").string()));
  const auto n_shards = manifest.at("n_shards").get<std::size_t>();
  if (ensemble_size == 0) ensemble_size = n_shards;
  if (ensemble_size > n_shards) {
    throw std::invalid_argument("load_models: requested ensemble of " +
                                std::to_string(ensemble_size) + " but only " +
                                std::to_string(n_shards) + " shard models exist");
  }
  NGramModel public_model = NGramModel::load((dir / "public.json").string());
  std::vector<NGramModel> private_models;
  private_models.reserve(ensemble_size);
  for (std::size_t i = 0; i < ensemble_size; ++i) {
    private_models.push_back(NGramModel::load((dir / shard_file_name(i)).string()));
    if (!(private_models.back().vocabulary() == public_model.vocabulary())) {
      throw std::runtime_error("load_models: shard " + std::to_string(i) +
                               " has a different vocabulary than the public model");
    }
  }
  Vocabulary vocab = public_model.vocabulary();
  return ModelSet{std::move(vocab), std::move(public_model), std::move(private_models)};
}

DecodingConfig parse_decode_config(const std::string& text) {
  static const std::set<std::string> kKnownKeys = {
      "alpha",  "beta", "N",    "sigma", "lambda",     "T",
      "top_k",  "delta", "mode", "seed",  "eps_budget", "query_budget",
      "subsample_q", "symmetric_screening"};
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!kKnownKeys.count(key)) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (!kv.emplace(key, value).second) {
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    }
  }
  const auto require = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw std::invalid_argument("config: missing required key '" + key + "'");
    }
    return it->second;
  };

  const double alpha_value = parse_strict_double("alpha", require("alpha"));
  RenyiOrder alpha(alpha_value);

  ScreeningConfig screening{
      .lambda_screen = parse_strict_double("lambda", require("lambda")),
      .sigma = parse_strict_double("sigma", require("sigma")),
      .threshold = parse_extended_real("T", require("T")),
      .top_k = static_cast<std::size_t>(parse_strict_u64("top_k", require("top_k"))),
      .alpha = alpha};
  if (kv.count("symmetric_screening")) {
    const std::string& v = kv.at("symmetric_screening");
    if (v != "true" && v != "false") {
      throw std::invalid_argument("config: symmetric_screening must be true or false");
    }
    screening.use_symmetric_divergence = (v == "true");
  }

  const std::string& mode_value = require("mode");
  DecodingMode mode;
  if (mode_value == "adaptive") {
    mode = DecodingMode::kAdaptive;
  } else if (mode_value == "baseline") {
    mode = DecodingMode::kBaseline;
  } else {
    throw std::invalid_argument("config: mode must be 'adaptive' or 'baseline', got '" +
                                mode_value + "'");
  }

  std::optional<BaselineConfig> baseline;
  if (mode == DecodingMode::kBaseline) {
    baseline = BaselineConfig{
        .eps_budget = parse_strict_double("eps_budget", require("eps_budget")),
        .query_budget =
            static_cast<std::size_t>(parse_strict_u64("query_budget", require("query_budget"))),
        .subsample_q = parse_strict_double("subsample_q", require("subsample_q"))};
  }

  return DecodingConfig{.alpha = alpha,
                        .beta = parse_strict_double("beta", require("beta")),
                        .ensemble_size =
                            static_cast<std::size_t>(parse_strict_u64("N", require("N"))),
                        .screening = screening,
                        .delta = parse_strict_double("delta", require("delta")),
                        .mode = mode,
                        .baseline = baseline,
                        .seed = parse_strict_u64("seed", require("seed"))};
}

DecodingConfig load_decode_config(const std::string& path) {
  return parse_decode_config(read_text_file(path));
}

std::string config_to_json(const DecodingConfig& config) {
  json j;
  j["alpha"] = config.alpha.value();
  j["beta"] = config.beta;
  j["N"] = config.ensemble_size;
  j["sigma"] = config.screening.sigma;
  j["lambda"] = config.screening.lambda_screen;
  j["T"] = threshold_to_json(config.screening.threshold);
  j["top_k"] = config.screening.top_k;
  j["delta"] = config.delta;
  j["mode"] = config.mode == DecodingMode::kAdaptive ? "adaptive" : "baseline";
  j["seed"] = config.seed;
  j["symmetric_screening"] = config.screening.use_symmetric_divergence;
  if (config.baseline.has_value()) {
    j["eps_budget"] = config.baseline->eps_budget;
    j["query_budget"] = config.baseline->query_budget;
    j["subsample_q"] = config.baseline->subsample_q;
  }
  return j.dump();
}

EvalReport run_decode(const DecodeOptions& options) {
  const DecodingConfig& cfg = options.config;
  const ModelSet models = load_models(options.models_dir, cfg.ensemble_size);
  cfg.validate(models.vocab.size());
  const std::vector<TokenSeq> eval_docs =
      read_eval_documents(options.eval_path, models.vocab);

  PrivacyLedger ledger(cfg.alpha, cfg.delta);
  std::ofstream ledger_out;
  if (!options.ledger_path.empty()) {
    ledger_out.open(options.ledger_path, std::ios::binary | std::ios::trunc);
    if (!ledger_out) throw std::runtime_error("cannot write " + options.ledger_path);
    json header;
    header["record"] = "header";
    header["format"] = "dpmix-ledger";
    header["version"] = kLedgerFormatVersion;
    header["config"] = json::parse(config_to_json(cfg));
    ledger_out << header.dump() << "\n";
  }

  const std::size_t n = cfg.ensemble_size;
  double nll_sum = 0.0;
  std::size_t screened_out = 0;
  // Realized mixing weights and likelihoods of queries that passed the
  // screen, [model][query], for the utility-gap bound.
  std::vector<std::vector<double>> gap_lambdas(n);
  std::vector<std::vector<double>> gap_private(n);
  std::vector<double> gap_public;
  std::size_t total_queries = 0;

  QueryStream stream{eval_docs, options.max_queries};
  stream.for_each([&](std::size_t qi, std::span<const std::int32_t> context,
                      std::int32_t target) {
    const ProbDist p_public = models.public_model.predict(context);
    Rng rng = Rng::derive(cfg.seed, qi);

    QueryOutcome outcome = [&] {
      if (cfg.mode == DecodingMode::kAdaptive) {
        std::vector<ProbDist> private_dists;
        private_dists.reserve(n);
        for (const NGramModel& m : models.private_models) {
          private_dists.push_back(m.predict(context));
        }
        QueryOutcome out = decode_adaptive(private_dists, p_public, cfg, ledger, rng);
        if (!out.screened_out) {
          for (std::size_t j = 0; j < n; ++j) {
            gap_lambdas[j].push_back(out.lambdas[j]);
            gap_private[j].push_back(private_dists[j][static_cast<std::size_t>(target)]);
          }
          gap_public.push_back(p_public[static_cast<std::size_t>(target)]);
        } else if (options.ppl_mode == PplMode::kProjected) {
          // Scoring-only reconstruction of the projected mixture; charges
          // nothing and draws no randomness.
          std::vector<ProbDist> projected;
          projected.reserve(n);
          for (const ProbDist& p : private_dists) {
            projected.push_back(project(p, p_public, cfg.alpha, cfg.beta).projected);
          }
          std::vector<double> mean(p_public.size(), 0.0);
          for (const ProbDist& p : projected) {
            for (std::size_t x = 0; x < mean.size(); ++x) mean[x] += p[x];
          }
          for (double& x : mean) x /= static_cast<double>(n);
          out.output_dist = ProbDist(std::move(mean));
        }
        return out;
      }
      const DistProvider provider = [&](std::size_t i) {
        return models.private_models[i].predict(context);
      };
      return decode_baseline(provider, p_public, cfg, ledger, rng);
    }();

    const double likelihood = outcome.output_dist[static_cast<std::size_t>(target)];
    const double nll = -std::log(likelihood);
    nll_sum += nll;
    if (outcome.screened_out) ++screened_out;
    ++total_queries;

    if (ledger_out.is_open()) {
      json record;
      record["record"] = "query";
      record["i"] = qi;
      record["screened"] = outcome.screened_out;
      record["eps_screen"] = outcome.eps_screen;
      record["eps_decode"] = outcome.eps_decode;
      record["eps_rdp_cum"] = ledger.eps_rdp_total();
      record["eps_dp_cum"] = ledger.eps_dp_total();
      record["token"] = outcome.token;
      record["target"] = target;
      record["nll"] = nll;
      record["digest"] = digest_hex(outcome.output_dist_digest);
      if (outcome.eps_decode_clamped) record["clamped"] = true;
      ledger_out << record.dump() << "\n";
    }
  });

  if (total_queries == 0) {
    throw std::runtime_error("decode: eval stream produced no queries");
  }

  EvalReport report;
  report.perplexity = std::exp(nll_sum / static_cast<double>(total_queries));
  report.queries_answered = total_queries;
  report.queries_screened_out = screened_out;
  report.eps_rdp_final = ledger.eps_rdp_total();
  report.eps_dp_final = ledger.eps_dp_total();
  report.utility_gap_bound =
      gap_public.empty() ? 0.0 : utility_gap_bound(gap_lambdas, gap_private, gap_public);
  report.config_snapshot = config_to_json(cfg);

  if (!options.report_path.empty()) {
    json j;
    j["format"] = "dpmix-report";
    j["version"] = kReportFormatVersion;
    j["perplexity"] = report.perplexity;
    j["queries_answered"] = report.queries_answered;
    j["queries_screened_out"] = report.queries_screened_out;
    j["eps_rdp_final"] = report.eps_rdp_final;
    j["eps_dp_final"] = report.eps_dp_final;
    j["utility_gap_bound"] = report.utility_gap_bound;
    j["config"] = json::parse(report.config_snapshot);
    std::ofstream out(options.report_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + options.report_path);
    out << j.dump(2) << "\n";
  }
  return report;
}

EvaluateResult run_evaluate(const std::string& models_dir, const std::string& eval_path,
                            std::size_t max_queries) {
  const ModelSet models = load_models(models_dir, 0);
  const std::vector<TokenSeq> eval_docs = read_eval_documents(eval_path, models.vocab);
  const std::size_t n = models.private_models.size();

  double public_nll = 0.0;
  std::vector<double> private_nll(n, 0.0);
  double ensemble_nll = 0.0;
  std::size_t queries = 0;

  QueryStream stream{eval_docs, max_queries};
  stream.for_each([&](std::size_t, std::span<const std::int32_t> context,
                      std::int32_t target) {
    const auto x = static_cast<std::size_t>(target);
    public_nll += -std::log(models.public_model.predict(context)[x]);
    double mean_likelihood = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const ProbDist p = models.private_models[j].predict(context);
      private_nll[j] += -std::log(p[x]);
      mean_likelihood += p[x];
    }
    ensemble_nll += -std::log(mean_likelihood / static_cast<double>(n));
    ++queries;
  });
  if (queries == 0) throw std::runtime_error("evaluate: eval stream produced no queries");

  EvaluateResult result;
  result.queries = queries;
  const double q = static_cast<double>(queries);
  result.public_ppl = std::exp(public_nll / q);
  for (double v : private_nll) result.private_ppl.push_back(std::exp(v / q));
  result.ensemble_avg_ppl = std::exp(ensemble_nll / q);
  return result;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const DecodingConfig& base_config,
                                const std::string& models_dir, const std::string& eval_path,
                                const std::string& out_csv, std::size_t max_queries,
                                bool parallel) {
  if (spec.values.empty()) {
    throw std::invalid_argument("sweep: no values given");
  }
  std::ofstream csv(out_csv, std::ios::binary | std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + out_csv);
  csv << "param,value,eps_rdp,eps_dp,ppl,screened_out\n";
  csv.flush();

  const auto run_one = [&](const std::string& value, std::uint64_t seed) {
    DecodingConfig cfg = apply_sweep_value(base_config, spec.parameter, value);
    cfg.seed = seed;
    return run_decode(DecodeOptions{.models_dir = models_dir,
                                    .eval_path = eval_path,
                                    .config = std::move(cfg),
                                    .max_queries = max_queries});
  };

  std::vector<SweepRow> rows;
  try {
    if (parallel) {
      std::vector<std::future<EvalReport>> futures;
      futures.reserve(spec.values.size());
      for (std::size_t i = 0; i < spec.values.size(); ++i) {
        const std::string value = spec.values[i];
        const std::uint64_t seed = Rng::derive(base_config.seed, i).seed();
        futures.push_back(std::async(std::launch::async, run_one, value, seed));
      }
      for (std::size_t i = 0; i < futures.size(); ++i) {
        const EvalReport report = futures[i].get();
        rows.push_back(SweepRow{spec.values[i], report.eps_rdp_final, report.eps_dp_final,
                                report.perplexity, report.queries_screened_out});
      }
    } else {
      for (const std::string& value : spec.values) {
        const EvalReport report = run_one(value, base_config.seed);
        rows.push_back(SweepRow{value, report.eps_rdp_final, report.eps_dp_final,
                                report.perplexity, report.queries_screened_out});
      }
    }
  } catch (const std::exception& e) {
    for (const SweepRow& row : rows) {
      csv << spec.parameter << "," << row.value << "," << format_double(row.eps_rdp) << ","
          << format_double(row.eps_dp) << "," << format_double(row.ppl) << ","
          << row.screened_out << "\n";
    }
    csv << "# invalid: " << e.what() << "\n";
    csv.flush();
    throw;
  }

  for (const SweepRow& row : rows) {
    csv << spec.parameter << "," << row.value << "," << format_double(row.eps_rdp) << ","
        << format_double(row.eps_dp) << "," << format_double(row.ppl) << ","
        << row.screened_out << "\n";
  }
  return rows;
}

AccountResult run_account(const std::string& ledger_path, std::optional<double> alpha,
                          std::optional<double> delta) {
  std::ifstream in(ledger_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + ledger_path);

  AccountResult result;
  std::string line;
  std::size_t line_number = 0;

  if (!std::getline(in, line)) {
    throw std::runtime_error(ledger_path + ": empty ledger (missing header)");
  }
  ++line_number;
  json header;
  try {
    header = json::parse(line);
  } catch (const std::exception& e) {
    throw std::runtime_error(ledger_path + ":1: bad header: " + e.what());
  }
  if (header.value("record", "") != "header" ||
      header.value("format", "") != "dpmix-ledger") {
    throw std::runtime_error(ledger_path + ":1: not a dpmix ledger header");
  }
  const double header_alpha = header.at("config").at("alpha").get<double>();
  const double header_delta = header.at("config").at("delta").get<double>();
  result.alpha = alpha.value_or(header_alpha);
  result.delta = delta.value_or(header_delta);
  const bool check_dp_chain = result.alpha == header_alpha && result.delta == header_delta;
  const RenyiOrder order(result.alpha);

  double running = 0.0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(ledger_path + ":" + std::to_string(line_number) +
                               ": parse error: " + e.what());
    }
    if (record.value("record", "") != "query") {
      throw std::runtime_error(ledger_path + ":" + std::to_string(line_number) +
                               ": expected a query record");
    }
    double eps_screen, eps_decode, stored_rdp, stored_dp;
    try {
      eps_screen = record.at("eps_screen").get<double>();
      eps_decode = record.at("eps_decode").get<double>();
      stored_rdp = record.at("eps_rdp_cum").get<double>();
      stored_dp = record.at("eps_dp_cum").get<double>();
    } catch (const std::exception& e) {
      throw std::runtime_error(ledger_path + ":" + std::to_string(line_number) +
                               ": missing field: " + e.what());
    }
    running += eps_screen + eps_decode;
    ++result.entries;
    if (stored_rdp != running) {
      result.mismatches.push_back(
          AccountMismatch{line_number, "eps_rdp_cum", stored_rdp, running});
    }
    if (check_dp_chain) {
      const double expected_dp = rdp_to_dp(running, order, result.delta);
      if (stored_dp != expected_dp) {
        result.mismatches.push_back(
            AccountMismatch{line_number, "eps_dp_cum", stored_dp, expected_dp});
      }
    }
  }
  result.eps_rdp = running;
  result.eps_dp = rdp_to_dp(running, order, result.delta);
  return result;
}

}  // namespace dpmix
