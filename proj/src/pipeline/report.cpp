#include "amwp/pipeline/report.hpp"

#include <cmath>
#include <sstream>

#include "amwp/core/tensor.hpp"

namespace amwp::pipeline {

using nlohmann::json;

json bucket_json(const std::map<std::size_t, solver::BucketStats>& buckets) {
  json out = json::array();
  for (const auto& [ops, b] : buckets) {
    out.push_back({{"bucket", ops}, {"count", b.count}, {"percentage", b.percentage}, {"accuracy", b.accuracy()}});
  }
  return out;
}

json eval_report_json(const solver::EvalReport& r) {
  return {{"total", r.total}, {"correct", r.correct}, {"accuracy", r.accuracy()}, {"buckets", bucket_json(r.buckets)}};
}

namespace {

double finite(double v, const char* what, std::size_t epoch) {
  if (!std::isfinite(v))
    throw core::NumericError(std::string("non-finite ") + what + " in epoch " + std::to_string(epoch));
  return v;
}

}  // namespace

json RunReport::to_json(bool include_timing) const {
  json eps = json::array();
  for (const EpochMetrics& e : epochs) {
    json row = {{"epoch", e.epoch},
                {"lr", e.lr},
                {"l_seq", finite(e.l_seq, "l_seq", e.epoch)},
                {"l_a", finite(e.l_a, "l_a", e.epoch)},
                {"l_s", finite(e.l_s, "l_s", e.epoch)},
                {"l_disc", finite(e.l_disc, "l_disc", e.epoch)},
                {"dev_acc", e.dev_acc ? json(*e.dev_acc) : json(nullptr)},
                {"buckets", bucket_json(e.buckets)}};
    if (include_timing) row["wall_seconds"] = e.wall_seconds;
    eps.push_back(std::move(row));
  }
  json out = {{"config", config.to_json()},
              {"train_size", train_size},
              {"dev_size", dev_size},
              {"epochs", std::move(eps)},
              {"best_epoch", best_epoch},
              {"best_dev_acc", best_dev_acc}};
  if (include_timing) out["wall_seconds"] = wall_seconds;
  return out;
}

std::string RunReport::epochs_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,l_seq,l_a,l_s,l_disc,dev_acc\n";
  for (const EpochMetrics& e : epochs) {
    os << e.epoch << ',' << e.l_seq << ',' << e.l_a << ',' << e.l_s << ',' << e.l_disc << ',';
    if (e.dev_acc) os << *e.dev_acc;
    os << '\n';
  }
  return os.str();
}

}  // namespace amwp::pipeline
