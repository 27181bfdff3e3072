// embed, train-rf and predict-rf.

#include <map>

#include "command.hpp"
#include "ctp/error.hpp"
#include "forest_data.hpp"
#include "json.hpp"

namespace ctp::cli {

namespace fs = std::filesystem;

rf::Dataset join_features(const FeatureMatrix& m, std::span<const LabeledTrial> entries) {
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < m.rows(); ++i) index.emplace(m.ids[i], i);
  rf::Dataset data(m.dim);
  for (const auto& e : entries) {
    auto it = index.find(e.trial.nct_id);
    if (it == index.end()) {
      throw InvalidArgument("no feature row for " + e.trial.nct_id + "; embed this corpus first");
    }
    data.add(m.row(it->second), e.label.value == LabelValue::Yes ? 1 : 0);
  }
  return data;
}

namespace {

void add_embed(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path corpus, out;
    EncoderOptions encoder;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("embed", "Embed every trial of a corpus into 11*h feature vectors");
  add_path(sub, "--corpus", o->corpus, "Labeled corpus (labeled and unlabeled trials are embedded)");
  add_path(sub, "--out", o->out, "Feature matrix output");
  add_encoder_options(sub, o->encoder);

  cmds.push_back({sub, [o](Context& ctx) {
                    const auto corpus = load_corpus(o->corpus);
                    std::vector<TrialRecord> records;
                    for (const auto& e : corpus.entries) records.push_back(e.trial);
                    records.insert(records.end(), corpus.unlabeled.begin(), corpus.unlabeled.end());

                    const auto encoder = make_encoder(o->encoder);
                    EmbeddingCache cache;
                    const auto vectors = embed_records(records, *encoder, &cache);

                    FeatureMatrix m;
                    m.dim = kAttributeCount * encoder->dim();
                    auto meta = nlohmann::ordered_json::parse(io::meta_json(ctx.provenance));
                    meta["encoder"] = encoder->id();
                    m.metadata = meta.dump();
                    for (const auto& v : vectors) m.append(v.source_nct_id, v.values);
                    save_matrix(m, o->out);
                    ctx.out << "embedded " << m.rows() << " trials, dim " << m.dim << " ("
                            << encoder->id() << ", " << cache.size() << " distinct texts)\n";
                  },
                  &o->encoder.seed});
}

void add_train_rf(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path features, corpus, out;
    rf::ForestParams params;
    std::size_t threads = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("train-rf", "Train the random-forest classifier");
  add_path(sub, "--features", o->features, "Feature matrix covering the training trials");
  add_path(sub, "--corpus", o->corpus, "Labeled training corpus");
  add_path(sub, "--out", o->out, "Forest model output");
  add_forest_options(sub, o->params, o->threads);

  cmds.push_back({sub, [o](Context& ctx) {
                    const auto m = load_matrix(o->features);
                    const auto corpus = load_corpus(o->corpus);
                    const auto data = join_features(m, corpus.entries);
                    auto forest = rf::train(data, o->params, o->threads);
                    forest.metadata = io::meta_json(ctx.provenance);
                    rf::save(forest, o->out);
                    std::size_t leaves = 0, depth = 0;
                    for (const auto& t : forest.trees()) {
                      leaves += t.leaf_count();
                      depth = std::max(depth, t.depth());
                    }
                    ctx.out << "trained " << forest.trees().size() << " trees on " << data.size()
                            << " rows x " << data.dim() << " features; " << leaves
                            << " leaves, max depth " << depth << '\n';
                  },
                  &o->params.seed});
}

void add_predict_rf(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path model, features, corpus, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("predict-rf", "Predict with a trained forest");
  add_path(sub, "--model", o->model, "Forest model");
  add_path(sub, "--features", o->features, "Feature matrix");
  add_path(sub, "--corpus", o->corpus,
           "Restrict to the labeled trials of this corpus, in its order (default: every matrix row)",
           false);
  add_path(sub, "--out", o->out, "Predictions output");

  cmds.push_back({sub, [o](Context& ctx) {
    const auto forest = rf::load(o->model);
    const auto m = load_matrix(o->features);
    std::vector<std::size_t> rows;
    if (o->corpus.empty()) {
      for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(i);
    } else {
      std::map<std::string_view, std::size_t> index;
      for (std::size_t i = 0; i < m.rows(); ++i) index.emplace(m.ids[i], i);
      for (const auto& e : load_corpus(o->corpus).entries) {
        auto it = index.find(e.trial.nct_id);
        if (it == index.end()) throw InvalidArgument("no feature row for " + e.trial.nct_id);
        rows.push_back(it->second);
      }
    }
    std::vector<io::PredictionRecord> preds;
    std::size_t yes = 0;
    for (std::size_t i : rows) {
      const auto p = forest.predict(m.row(i));
      preds.push_back({m.ids[i], p.label == 1 ? LabelValue::Yes : LabelValue::No, p.vote_fraction,
                       std::nullopt, std::nullopt});
      yes += p.label == 1;
    }
    write_output(o->out, [&](std::ostream& out) { io::write_predictions(out, preds, &ctx.provenance); });
    ctx.out << "predicted " << preds.size() << " trials (" << yes << " Yes)\n";
  }});
}

}  // namespace

void add_forest_commands(CLI::App& app, Commands& cmds) {
  add_embed(app, cmds);
  add_train_rf(app, cmds);
  add_predict_rf(app, cmds);
}

}  // namespace ctp::cli
