// Command-line front end: data generation, training, evaluation and the
// inspection commands.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "amwp/analogy/analogy.hpp"
#include "amwp/core/checkpoint.hpp"
#include "amwp/corpus/jsonl.hpp"
#include "amwp/corpus/synthetic.hpp"
#include "amwp/disc/discriminator.hpp"
#include "amwp/expr/infix.hpp"
#include "amwp/pipeline/embeddings.hpp"
#include "amwp/pipeline/trainer.hpp"

using namespace amwp;
using nlohmann::json;

namespace {

std::vector<corpus::ProblemRecord> load_corpus(const std::string& path, const corpus::DecoderUniverse& universe) {
  corpus::IngestResult r = corpus::ingest_jsonl_file(path, universe);
  if (r.dropped > 0) {
    std::cerr << path << ": dropped " << r.dropped << " problems";
    for (const auto& [reason, n] : r.drop_reasons) std::cerr << " " << reason << "=" << n;
    std::cerr << "\n";
  }
  return std::move(r.records);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  write_text(path, j.dump(2) + "\n");
}

std::string equation_text(std::span<const int> ids, const corpus::DecoderUniverse& universe) {
  expr::PrefixEquation eq;
  for (int id : ids) eq.push_back(universe.token(static_cast<std::size_t>(id)));
  return expr::to_infix(expr::prefix_to_tree(eq));
}

void print_buckets(const solver::EvalReport& r) {
  std::printf("accuracy %.4f (%zu/%zu)\n", r.accuracy(), r.correct, r.total);
  std::printf("%-8s %8s %8s %9s\n", "bucket", "count", "pct", "accuracy");
  for (const auto& [ops, b] : r.buckets)
    std::printf("%-8zu %8zu %7.1f%% %9.4f\n", ops, b.count, b.percentage, b.accuracy());
}

std::vector<std::size_t> parse_levels(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoul(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analogical math word problem solver training"};
  app.require_subcommand(1);

  // gen-data
  corpus::SyntheticConfig gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic corpus as JSONL");
  gen_cmd->add_option("--n", gen.n_problems, "Number of problems")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--max-ops", gen.max_ops, "Largest operator count")->capture_default_str();
  gen_cmd->add_option("--op-pct", gen.op_count_pct, "Percentages for 1..4 operators")->delimiter(',');
  gen_cmd->add_option("--distractor-prob", gen.distractor_prob)->capture_default_str();
  gen_cmd->add_option("--constant-prob", gen.constant_prob)->capture_default_str();
  gen_cmd->add_option("--id-prefix", gen.id_prefix)->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output path")->required();

  // train
  std::string train_config, train_path, dev_path, ckpt_out, report_out, csv_out, levels_s;
  std::optional<std::size_t> epochs, batch, embed, hidden, eval_every, beam;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda1, lambda2, lr, dropout, stop_at;
  bool no_analogy = false, no_disc = false, no_grad = false, no_extra = false, quiet = false;
  auto* train_cmd = app.add_subcommand("train", "Train a solver");
  train_cmd->add_option("--config", train_config, "JSON config; flags below override it");
  train_cmd->add_option("--train", train_path, "Training corpus (JSONL)")->required();
  train_cmd->add_option("--dev", dev_path, "Dev corpus for model selection (JSONL)");
  train_cmd->add_option("--checkpoint", ckpt_out, "Where to write the checkpoint")->required();
  train_cmd->add_option("--report", report_out, "RunReport JSON path");
  train_cmd->add_option("--csv", csv_out, "Per-epoch metrics CSV path");
  train_cmd->add_option("--epochs", epochs);
  train_cmd->add_option("--batch-size", batch);
  train_cmd->add_option("--seed", seed);
  train_cmd->add_option("--lambda1", lambda1);
  train_cmd->add_option("--lambda2", lambda2);
  train_cmd->add_option("--lr", lr);
  train_cmd->add_option("--dropout", dropout);
  train_cmd->add_option("--beam", beam);
  train_cmd->add_option("--embed", embed);
  train_cmd->add_option("--hidden", hidden);
  train_cmd->add_option("--eval-every", eval_every);
  train_cmd->add_option("--stop-at", stop_at, "Stop once dev accuracy reaches this value");
  train_cmd->add_option("--levels", levels_s, "Analogy levels, e.g. 1,2");
  train_cmd->add_flag("--no-analogy", no_analogy, "Switch off analogy identification");
  train_cmd->add_flag("--no-disc", no_disc, "Switch off solution discrimination");
  train_cmd->add_flag("--no-grad-guided", no_grad, "Replace a random token instead of the gradient-selected one");
  train_cmd->add_flag("--no-extra-negs", no_extra, "No random corpus negatives");
  train_cmd->add_flag("--quiet", quiet, "No per-epoch progress");

  // eval
  std::string eval_ckpt, eval_corpus, eval_report;
  std::size_t eval_beam = 5;
  auto* eval_cmd = app.add_subcommand("eval", "Value accuracy of a checkpoint");
  eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
  eval_cmd->add_option("--corpus", eval_corpus)->required();
  eval_cmd->add_option("--beam", eval_beam)->capture_default_str();
  eval_cmd->add_option("--report", eval_report, "JSON report path");

  // mine-pairs
  std::string mine_corpus, mine_out, mine_levels = "1,2";
  std::size_t mine_sample = 0;
  std::uint64_t mine_seed = 0;
  bool mine_strict = false;
  auto* mine_cmd = app.add_subcommand("mine-pairs", "Signature buckets and sampled analogy pairs");
  mine_cmd->add_option("--corpus", mine_corpus)->required();
  mine_cmd->add_option("--levels,--level", mine_levels)->capture_default_str();
  mine_cmd->add_option("--sample", mine_sample, "Sample pairs for this many problems")->capture_default_str();
  mine_cmd->add_option("--seed", mine_seed)->capture_default_str();
  mine_cmd->add_flag("--strict", mine_strict, "Signature operators must chain through left children");
  mine_cmd->add_option("--out", mine_out, "Output path (stdout when omitted)");

  // negatives
  std::string neg_ckpt, neg_corpus, neg_out, neg_id;
  std::size_t neg_n = 20;
  std::uint64_t neg_seed = 0;
  bool neg_random_pos = false, neg_no_extra = false;
  auto* neg_cmd = app.add_subcommand("negatives", "Negative solution sets under a checkpoint's discriminator");
  neg_cmd->add_option("--checkpoint", neg_ckpt)->required();
  neg_cmd->add_option("--corpus", neg_corpus)->required();
  neg_cmd->add_option("--n", neg_n, "Number of problems")->capture_default_str();
  neg_cmd->add_option("--problem-id", neg_id, "Only this problem");
  neg_cmd->add_option("--seed", neg_seed)->capture_default_str();
  neg_cmd->add_flag("--no-grad-guided", neg_random_pos);
  neg_cmd->add_flag("--no-extra-negs", neg_no_extra);
  neg_cmd->add_option("--out", neg_out, "Output path (stdout when omitted)");

  // export-emb
  std::string emb_ckpt, emb_corpus, emb_out;
  std::size_t emb_n = 150;
  std::uint64_t emb_seed = 0;
  auto* emb_cmd = app.add_subcommand("export-emb", "Problem vectors for visualisation");
  emb_cmd->add_option("--checkpoint", emb_ckpt)->required();
  emb_cmd->add_option("--corpus", emb_corpus)->required();
  emb_cmd->add_option("--n", emb_n)->capture_default_str();
  emb_cmd->add_option("--seed", emb_seed)->capture_default_str();
  emb_cmd->add_option("--out", emb_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      const auto records = corpus::generate_synthetic(gen);
      corpus::emit_jsonl_file(gen_out, records);
      std::cerr << "wrote " << records.size() << " problems to " << gen_out << "\n";
    } else if (*train_cmd) {
      pipeline::TrainConfig cfg = pipeline::TrainConfig::desk();
      if (!train_config.empty()) cfg = pipeline::TrainConfig::from_json(core::read_json_file(train_config), cfg);
      if (epochs) cfg.epochs = *epochs;
      if (batch) cfg.batch_size = *batch;
      if (seed) cfg.seed = *seed;
      if (lambda1) cfg.lambda1 = *lambda1;
      if (lambda2) cfg.lambda2 = *lambda2;
      if (lr) cfg.lr = *lr;
      if (dropout) cfg.dropout = *dropout;
      if (beam) cfg.beam = *beam;
      if (embed) cfg.dims.embed = *embed;
      if (hidden) cfg.dims.hidden = *hidden;
      if (eval_every) cfg.eval_every = *eval_every;
      if (stop_at) cfg.stop_at_dev_acc = *stop_at;
      if (!levels_s.empty()) cfg.levels = parse_levels(levels_s);
      if (no_analogy) cfg.flags.analogy_on = false;
      if (no_disc) cfg.flags.disc_on = false;
      if (no_grad) cfg.flags.grad_guided_on = false;
      if (no_extra) cfg.flags.extra_negs_on = false;
      cfg.validate();

      const corpus::DecoderUniverse universe;
      auto train_records = load_corpus(train_path, universe);
      std::vector<corpus::ProblemRecord> dev_records;
      if (!dev_path.empty()) dev_records = load_corpus(dev_path, universe);

      auto progress = [&](const pipeline::EpochMetrics& e) {
        if (quiet) return;
        std::fprintf(stderr, "epoch %3zu lr %.2e l_seq %.4f l_a %.4f l_s %.4f l_disc %.4f", e.epoch, e.lr, e.l_seq,
                     e.l_a, e.l_s, e.l_disc);
        if (e.dev_acc) std::fprintf(stderr, " dev_acc %.4f", *e.dev_acc);
        std::fprintf(stderr, " (%.1fs)\n", e.wall_seconds);
      };
      pipeline::TrainResult res = pipeline::train(cfg, std::move(train_records), std::move(dev_records), progress);
      res.models->save(ckpt_out);
      if (!report_out.empty()) write_json(report_out, res.report.to_json());
      if (!csv_out.empty()) write_text(csv_out, res.report.epochs_csv());
      if (res.report.dev_size)
        std::fprintf(stderr, "kept epoch %zu (dev acc %.4f), %.1fs\n", res.report.best_epoch,
                     res.report.best_dev_acc, res.report.wall_seconds);
      else
        std::fprintf(stderr, "kept last epoch %zu, %.1fs\n", res.report.best_epoch, res.report.wall_seconds);
    } else if (*eval_cmd) {
      auto m = pipeline::ModelBundle::load(eval_ckpt);
      const auto records = load_corpus(eval_corpus, m->universe);
      const solver::EvalReport r = pipeline::evaluate(*m, records, eval_beam);
      print_buckets(r);
      if (!eval_report.empty()) write_json(eval_report, pipeline::eval_report_json(r));
    } else if (*mine_cmd) {
      const auto records = load_corpus(mine_corpus, corpus::DecoderUniverse());
      const auto levels = parse_levels(mine_levels);
      std::size_t max_level = 1;
      for (std::size_t l : levels) max_level = std::max(max_level, l);
      const analogy::SignatureIndex index = analogy::build_index(records, max_level, mine_strict);
      json out;
      for (std::size_t l : levels) {
        json buckets = json::object();
        std::size_t positives = 0;
        for (const auto& [sig, members] : index.buckets(l)) {
          json ids = json::array();
          for (std::size_t i : members) ids.push_back(records[i].id);
          buckets[sig.text()] = std::move(ids);
          positives += members.size() * (members.size() - 1) / 2;
        }
        out["levels"][std::to_string(l)] = {{"buckets", std::move(buckets)}, {"positive_pairs", positives}};
      }
      if (mine_sample > 0) {
        std::vector<std::size_t> batch;
        for (std::size_t i = 0; i < std::min(mine_sample, records.size()); ++i) batch.push_back(i);
        core::Rng rng(mine_seed);
        const analogy::PairBatch pairs = analogy::sample_pairs(index, batch, 1, levels, rng);
        json sampled = json::array();
        for (const auto& [level, ps] : pairs.by_level)
          for (const analogy::Pair& p : ps)
            sampled.push_back({{"level", level}, {"a", records[p.a].id}, {"b", records[p.b].id}, {"positive", p.positive}});
        out["sampled"] = std::move(sampled);
      }
      write_json(mine_out, out);
    } else if (*neg_cmd) {
      auto m = pipeline::ModelBundle::load(neg_ckpt);
      const auto records = load_corpus(neg_corpus, m->universe);
      std::vector<std::vector<int>> corpus_gold;
      for (const auto& r : records) corpus_gold.push_back(m->universe.encode(r.gold_prefix));
      disc::NegativeOptions opts;
      opts.gradient_guided = !neg_random_pos;
      opts.extra_negatives = !neg_no_extra;
      core::Rng rng(neg_seed);
      json out = json::array();
      std::vector<std::size_t> picked;
      for (std::size_t i = 0; i < records.size() && (neg_id.empty() ? picked.size() < neg_n : picked.empty()); ++i)
        if (neg_id.empty() || records[i].id == neg_id) picked.push_back(i);
      if (!neg_id.empty() && picked.empty()) throw std::runtime_error("no problem with id " + neg_id);
      for (std::size_t i : picked) {
        const auto p = solver::prepare(records[i], m->vocab, m->universe);
        const core::Tensor x = m->problem_vec(p.word_ids);
        json row = {{"id", records[i].id}, {"gold", equation_text(p.gold_ids, m->universe)}};
        try {
          row["grad_norms"] = disc::select_vulnerable_token(m->disc, x, p.gold_ids, m->universe, p.mask).grad_norms;
        } catch (const disc::NoReplaceable&) {
          row["grad_norms"] = nullptr;
        }
        try {
          const disc::NegativeSet set =
              disc::build_negative_set(m->disc, x, records[i], p.gold_ids, corpus_gold, m->universe, p.mask, rng, opts);
          row["gold_position"] = set.gold_position ? json(*set.gold_position) : json(nullptr);
          row["random_position"] = set.random_position ? json(*set.random_position) : json(nullptr);
          json items = json::array();
          for (const disc::Negative& n : set.items)
            items.push_back({{"equation", equation_text(n.token_ids, m->universe)},
                             {"provenance", disc::provenance_name(n.provenance)},
                             {"prob", disc::discriminate(m->disc, x, n.token_ids).prob}});
          row["negatives"] = std::move(items);
          row["gold_prob"] = disc::discriminate(m->disc, x, p.gold_ids).prob;
        } catch (const disc::NoReplaceable& e) {
          row["error"] = e.what();
        }
        out.push_back(std::move(row));
      }
      write_json(neg_out, out);
    } else if (*emb_cmd) {
      auto m = pipeline::ModelBundle::load(emb_ckpt);
      const auto records = load_corpus(emb_corpus, m->universe);
      const auto rows = pipeline::export_embeddings(*m, records, emb_n, emb_seed);
      write_json(emb_out, pipeline::embeddings_json(rows));
      std::cerr << "wrote " << rows.size() << " vectors to " << emb_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
