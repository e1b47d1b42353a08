#include "mter/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "mter/build.hpp"
#include "mter/checkpoint.hpp"
#include "mter/corpus.hpp"
#include "mter/evaluation.hpp"
#include "mter/ranking.hpp"
#include "mter/training.hpp"

namespace mter {

namespace {

struct CorpusOptions {
  std::string reviews_path;
  std::string lexicon_path;
  int rating_scale = 5;
  FilterConfig filter;
  SplitRatios ratios;
  std::uint64_t seed = 42;
};

void add_corpus_options(CLI::App* cmd, CorpusOptions& opts, bool with_split = true) {
  cmd->add_option("--reviews", opts.reviews_path, "Reviews JSON-lines file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--lexicon", opts.lexicon_path, "Sentiment lexicon TSV file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--rating-scale", opts.rating_scale, "Highest overall rating N")
      ->check(CLI::Range(2, 100));
  cmd->add_option("--min-feature-support", opts.filter.min_feature_support);
  cmd->add_option("--min-review-tuples", opts.filter.min_review_tuples);
  cmd->add_option("--min-user-reviews", opts.filter.min_user_reviews);
  cmd->add_option("--min-item-reviews", opts.filter.min_item_reviews);
  if (with_split) {
    cmd->add_option("--train-ratio", opts.ratios.train);
    cmd->add_option("--valid-ratio", opts.ratios.valid);
    cmd->add_option("--test-ratio", opts.ratios.test);
  }
  cmd->add_option("--seed", opts.seed, "Random seed")->envname("MTER_SEED");
}

void add_train_options(CLI::App* cmd, TrainConfig& cfg) {
  cmd->set_config("--config", "", "Flat key=value config file");
  cmd->add_option("--lambda-b", cfg.lambda_b, "BPR weight");
  cmd->add_option("--lambda-f", cfg.lambda_f, "Factor L2 weight");
  cmd->add_option("--lambda-g", cfg.lambda_g, "Core L2 weight");
  cmd->add_option("--batch-x", cfg.batch_x);
  cmd->add_option("--batch-yu", cfg.batch_yu);
  cmd->add_option("--batch-yi", cfg.batch_yi);
  cmd->add_option("--n-s-bpr", cfg.n_s_bpr, "BPR pairs per iteration");
  cmd->add_option("--t-iter", cfg.t_iter, "Training iterations")->envname("MTER_T_ITER");
  cmd->add_option("--eta", cfg.eta, "Base learning rate");
  cmd->add_option("--ada-eps", cfg.ada_eps);
  cmd->add_option("--dim-a", cfg.dims.a);
  cmd->add_option("--dim-b", cfg.dims.b);
  cmd->add_option("--dim-c", cfg.dims.c);
  cmd->add_option("--dim-d", cfg.dims.d);
  cmd->add_option("--init-scale", cfg.init_scale);
  cmd->add_option("--eval-interval", cfg.eval_interval);
}

CorpusSplit load_and_split(const CorpusOptions& opts) {
  LexiconList lexicon = load_lexicon(opts.lexicon_path);
  auto reviews = load_reviews(opts.reviews_path, lexicon, opts.rating_scale);
  IndexedCorpus corpus = recursive_filter(reviews, opts.filter, opts.rating_scale);
  return split_corpus(corpus, opts.ratios, opts.seed);
}

void write_reviews_jsonl(const IndexedCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& review : corpus.reviews) {
    nlohmann::json phrases = nlohmann::json::array();
    for (const auto& t : review.tuples)
      phrases.push_back({{"feature", corpus.features.external_of(t.feature)},
                         {"opinion", corpus.opinions.external_of(t.opinion)},
                         {"polarity", t.polarity}});
    nlohmann::json j = {{"user", corpus.users.external_of(review.user)},
                        {"item", corpus.items.external_of(review.item)},
                        {"rating", review.rating},
                        {"phrases", phrases}};
    out << j.dump() << "\n";
  }
}

void emit_report(const nlohmann::json& report, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << report.dump(2) << "\n";
  }
}

// Re-derives the training split that produced a checkpoint so recommend /
// evaluate use the same candidate-exclusion sets.
CorpusSplit resplit_for_checkpoint(const Checkpoint& ckpt, CorpusOptions opts, bool seed_given) {
  if (!seed_given) opts.seed = ckpt.config.seed;
  opts.rating_scale = ckpt.rating_scale;
  return load_and_split(opts);
}

std::unordered_set<int> training_items_of(const IndexedCorpus& train, const Checkpoint& ckpt,
                                          int user) {
  std::unordered_set<int> items;
  for (const auto& review : train.reviews) {
    if (train.users.external_of(review.user) != ckpt.users.external_of(user)) continue;
    const int mapped = ckpt.items.index_of(train.items.external_of(review.item));
    if (mapped >= 0) items.insert(mapped);
  }
  return items;
}

int cmd_preprocess(const CorpusOptions& opts, const std::string& out_dir) {
  CorpusSplit split = load_and_split(opts);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path base(out_dir);
  write_reviews_jsonl(split.train, base / "train.jsonl");
  write_reviews_jsonl(split.valid, base / "valid.jsonl");
  write_reviews_jsonl(split.test, base / "test.jsonl");
  nlohmann::json stats = {{"users", split.train.m()},
                          {"items", split.train.n()},
                          {"features", split.train.p()},
                          {"opinions", split.train.q()},
                          {"train_reviews", split.train.reviews.size()},
                          {"valid_reviews", split.valid.reviews.size()},
                          {"test_reviews", split.test.reviews.size()}};
  std::ofstream(base / "stats.json") << stats.dump(2) << "\n";
  std::cout << stats.dump(2) << "\n";
  return 0;
}

int cmd_train(const CorpusOptions& opts, TrainConfig cfg, const std::string& out_dir) {
  cfg.seed = opts.seed;
  cfg.validate();
  CorpusSplit split = load_and_split(opts);
  const IndexedCorpus& train_corpus = split.train;

  FeatureScoreTable scores = aggregate_feature_scores(train_corpus);
  SparseTensor3 x = build_x(scores, train_corpus);
  SparseTensor3 yu = build_yu(train_corpus);
  SparseTensor3 yi = build_yi(train_corpus);
  PairOrderSet pairs = build_pair_sets(train_corpus);

  TrainResult result = train(x, yu, yi, pairs, cfg);

  Checkpoint ckpt;
  ckpt.model = std::move(result.model);
  ckpt.users = train_corpus.users;
  ckpt.items = train_corpus.items;
  ckpt.features = train_corpus.features;
  ckpt.opinions = train_corpus.opinions;
  ckpt.rating_scale = train_corpus.rating_scale;
  ckpt.config = cfg;
  save_checkpoint(ckpt, out_dir);

  std::ofstream trace_out(std::filesystem::path(out_dir) / "loss_trace.tsv");
  trace_out << "iteration\trecon_x\trecon_yu\trecon_yi\tbpr\treg\ttotal\n";
  for (const auto& rec : result.trace)
    trace_out << rec.iteration << "\t" << rec.recon_x << "\t" << rec.recon_yu << "\t"
              << rec.recon_yi << "\t" << rec.bpr << "\t" << rec.reg << "\t" << rec.total << "\n";
  std::cout << "checkpoint written to " << out_dir << "\n";
  return 0;
}

int cmd_recommend(const std::string& ckpt_dir, const std::string& user, int k,
                  const CorpusOptions& opts, bool have_corpus, bool seed_given) {
  Checkpoint ckpt = load_checkpoint(ckpt_dir);
  const int u = ckpt.users.index_of(user);
  if (u < 0) throw std::runtime_error("unknown user: " + user);

  std::unordered_set<int> exclude;
  if (have_corpus) {
    CorpusSplit split = resplit_for_checkpoint(ckpt, opts, seed_given);
    exclude = training_items_of(split.train, ckpt, u);
  }
  for (const auto& rec : recommend_topk(ckpt.model, u, exclude, k))
    std::cout << ckpt.items.external_of(rec.id) << "\t" << rec.score << "\n";
  return 0;
}

int cmd_explain(const std::string& ckpt_dir, const std::string& user, const std::string& item,
                int top_f, int top_w) {
  Checkpoint ckpt = load_checkpoint(ckpt_dir);
  const int u = ckpt.users.index_of(user);
  if (u < 0) throw std::runtime_error("unknown user: " + user);
  const int j = ckpt.items.index_of(item);
  if (j < 0) throw std::runtime_error("unknown item: " + item);

  std::vector<ExplainedFeature> features;
  for (const auto& f : rank_features(ckpt.model, u, j, top_f)) {
    ExplainedFeature ef;
    ef.feature = ckpt.features.external_of(f.id);
    for (const auto& w : rank_opinions(ckpt.model, u, j, f.id, top_w))
      ef.phrases.push_back(ckpt.opinions.external_of(w.id));
    features.push_back(std::move(ef));
  }
  std::cout << render_explanation(item, features) << "\n";
  return 0;
}

// Remaps a corpus part onto the checkpoint's id spaces, dropping reviews of
// entities the checkpoint does not know.
IndexedCorpus remap_to_checkpoint(const IndexedCorpus& part, const Checkpoint& ckpt) {
  IndexedCorpus out;
  out.users = ckpt.users;
  out.items = ckpt.items;
  out.features = ckpt.features;
  out.opinions = ckpt.opinions;
  out.rating_scale = ckpt.rating_scale;
  for (const auto& review : part.reviews) {
    const int u = ckpt.users.index_of(part.users.external_of(review.user));
    const int i = ckpt.items.index_of(part.items.external_of(review.item));
    if (u < 0 || i < 0) continue;
    IndexedReview mapped;
    mapped.user = u;
    mapped.item = i;
    mapped.rating = review.rating;
    for (const auto& t : review.tuples) {
      const int f = ckpt.features.index_of(part.features.external_of(t.feature));
      const int o = ckpt.opinions.index_of(part.opinions.external_of(t.opinion));
      if (f < 0 || o < 0) continue;
      mapped.tuples.push_back({f, o, t.polarity});
    }
    out.reviews.push_back(std::move(mapped));
  }
  return out;
}

int cmd_evaluate(const std::string& ckpt_dir, const CorpusOptions& opts, bool seed_given,
                 const std::vector<int>& ks, bool with_baselines, bool linear_gain,
                 const std::string& out_path) {
  Checkpoint ckpt = load_checkpoint(ckpt_dir);
  CorpusSplit raw = resplit_for_checkpoint(ckpt, opts, seed_given);
  IndexedCorpus train_part = remap_to_checkpoint(raw.train, ckpt);
  IndexedCorpus test_part = remap_to_checkpoint(raw.test, ckpt);

  const FactorModel& model = ckpt.model;
  Scorer mter_scorer = [&model](int u, int i) { return predict_overall(model, u, i); };
  const bool exponential = !linear_gain;

  nlohmann::json report;
  RecEvalResult mter_rec = eval_recommendation(mter_scorer, train_part, test_part, ks, exponential);
  for (const auto& [k, v] : mter_rec.mean_ndcg) report["mter"]["ndcg"][std::to_string(k)] = v;

  ContentEvalResult content = eval_content_prediction(model, test_part);
  report["mter"]["feature_ndcg"] = content.feature_ndcg;
  report["mter"]["opinion_ndcg"] = content.opinion_ndcg;

  if (with_baselines) {
    RecEvalResult mp_rec = eval_recommendation(most_popular_baseline(train_part), train_part,
                                               test_part, ks, exponential);
    for (const auto& [k, v] : mp_rec.mean_ndcg)
      report["most_popular"]["ndcg"][std::to_string(k)] = v;

    BprmfConfig bcfg;
    bcfg.factors = ckpt.config.dims.a;
    bcfg.lambda = ckpt.config.lambda_f;
    bcfg.eta = ckpt.config.eta;
    bcfg.iterations = ckpt.config.t_iter;
    bcfg.seed = ckpt.config.seed;
    BprmfModel bprmf = train_bprmf(train_part, bcfg);
    Scorer bprmf_scorer = [&bprmf](int u, int i) { return bprmf.score(u, i); };
    RecEvalResult bprmf_rec =
        eval_recommendation(bprmf_scorer, train_part, test_part, ks, exponential);
    for (const auto& [k, v] : bprmf_rec.mean_ndcg)
      report["bprmf"]["ndcg"][std::to_string(k)] = v;

    for (int k : ks) {
      report["t_test"]["mter_vs_bprmf"][std::to_string(k)] =
          paired_t_test(mter_rec.per_user.at(k), bprmf_rec.per_user.at(k)).p_value;
      report["t_test"]["mter_vs_most_popular"][std::to_string(k)] =
          paired_t_test(mter_rec.per_user.at(k), mp_rec.per_user.at(k)).p_value;
    }
  }
  emit_report(report, out_path);
  return 0;
}

int cmd_permtest(const CorpusOptions& opts, const std::string& scope, int n_perm,
                 const std::string& out_path) {
  LexiconList lexicon = load_lexicon(opts.lexicon_path);
  auto reviews = load_reviews(opts.reviews_path, lexicon, opts.rating_scale);
  IndexedCorpus corpus = recursive_filter(reviews, opts.filter, opts.rating_scale);

  PermutationReport rep = permutation_test(
      corpus, scope == "item" ? PermScope::item : PermScope::user, n_perm, opts.seed);
  nlohmann::json report = {{"scope", scope},
                           {"observed", rep.observed},
                           {"permuted", rep.permuted},
                           {"p_value", rep.p_value}};
  emit_report(report, out_path);
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"MTER: multi-task explainable recommendation"};
  app.require_subcommand(1);

  CorpusOptions opts;
  TrainConfig train_cfg;
  std::string out_dir, out_path, ckpt_dir, user, item, scope = "user";
  int k = 10, top_f = 3, top_w = 3, n_perm = 100;
  std::vector<int> ks = {10, 20, 50, 100};
  bool with_baselines = false, linear_gain = false;

  auto* preprocess = app.add_subcommand("preprocess", "Filter, index and split the corpus");
  add_corpus_options(preprocess, opts);
  preprocess->add_option("--out", out_dir, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train an MTER model");
  add_corpus_options(train, opts);
  add_train_options(train, train_cfg);
  train->add_option("--out", out_dir, "Checkpoint directory")->required();

  auto* recommend = app.add_subcommand("recommend", "Top-k recommendations for a user");
  recommend->add_option("--ckpt", ckpt_dir, "Checkpoint directory")->required();
  recommend->add_option("--user", user, "External user id")->required();
  recommend->add_option("--k", k)->check(CLI::PositiveNumber);
  auto* rec_reviews = recommend->add_option("--reviews", opts.reviews_path,
                                            "Reviews file, to exclude training items")
                          ->check(CLI::ExistingFile);
  recommend->add_option("--lexicon", opts.lexicon_path)->check(CLI::ExistingFile)->needs(rec_reviews);
  auto* rec_seed = recommend->add_option("--seed", opts.seed);

  auto* explain = app.add_subcommand("explain", "Textual explanation for a (user, item) pair");
  explain->add_option("--ckpt", ckpt_dir)->required();
  explain->add_option("--user", user)->required();
  explain->add_option("--item", item)->required();
  explain->add_option("--features", top_f)->check(CLI::PositiveNumber);
  explain->add_option("--phrases", top_w)->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "NDCG evaluation against the test split");
  add_corpus_options(evaluate, opts);
  evaluate->add_option("--ckpt", ckpt_dir)->required();
  evaluate->add_option("--k-list", ks, "NDCG cutoffs");
  evaluate->add_flag("--baselines", with_baselines, "Also evaluate MostPopular and BPRMF");
  evaluate->add_flag("--linear-gain", linear_gain, "Use linear instead of exponential NDCG gain");
  evaluate->add_option("--out", out_path, "Report file (stdout when omitted)");

  auto* permtest = app.add_subcommand("permtest", "Opinion-usage dependency permutation test");
  add_corpus_options(permtest, opts, false);
  permtest->add_option("--scope", scope)->check(CLI::IsMember({"user", "item"}));
  permtest->add_option("--n-perm", n_perm)->check(CLI::PositiveNumber);
  permtest->add_option("--out", out_path, "Report file (stdout when omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (preprocess->parsed()) return cmd_preprocess(opts, out_dir);
    if (train->parsed()) return cmd_train(opts, train_cfg, out_dir);
    if (recommend->parsed())
      return cmd_recommend(ckpt_dir, user, k, opts, rec_reviews->count() > 0,
                           rec_seed->count() > 0);
    if (explain->parsed()) return cmd_explain(ckpt_dir, user, item, top_f, top_w);
    if (evaluate->parsed()) {
      const bool seed_given = evaluate->count("--seed") > 0;
      return cmd_evaluate(ckpt_dir, opts, seed_given, ks, with_baselines, linear_gain, out_path);
    }
    if (permtest->parsed()) return cmd_permtest(opts, scope, n_perm, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mter
