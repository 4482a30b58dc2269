#include "fewshot/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>

#include <nlohmann/json.hpp>

#include "fewshot/errors.h"

namespace fewshot {
namespace {

size_t class_index(std::span<const Label> order, const Label& label) {
  auto it = std::find(order.begin(), order.end(), label);
  if (it == order.end()) {
    throw InvalidArgument("label '" + label + "' is not in the class order");
  }
  return static_cast<size_t>(it - order.begin());
}

double ratio(size_t num, size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

size_t ConfusionMatrix::total() const {
  size_t n = 0;
  for (const auto& row : counts) {
    for (size_t v : row) n += v;
  }
  return n;
}

ConfusionMatrix confusion_matrix(std::span<const Label> gold,
                                 std::span<const Label> pred,
                                 std::span<const Label> class_order) {
  if (gold.size() != pred.size()) {
    throw InvalidArgument("confusion_matrix: gold and predicted lengths differ");
  }
  if (gold.empty()) throw InvalidArgument("confusion_matrix: no examples");
  ConfusionMatrix m;
  m.class_order.assign(class_order.begin(), class_order.end());
  m.counts.assign(class_order.size(),
                  std::vector<size_t>(class_order.size(), 0));
  for (size_t k = 0; k < gold.size(); ++k) {
    ++m.counts[class_index(class_order, gold[k])]
              [class_index(class_order, pred[k])];
  }
  return m;
}

const ClassScores& EvalReport::scores(const Label& label) const {
  for (const ClassScores& s : per_class) {
    if (s.label == label) return s;
  }
  throw InvalidArgument("report has no class '" + label + "'");
}

EvalReport f1_report(const ConfusionMatrix& matrix) {
  const size_t total = matrix.total();
  if (total == 0) throw InvalidArgument("f1_report: empty confusion matrix");
  const size_t classes = matrix.class_order.size();

  EvalReport report;
  report.confusion = matrix;
  report.n_examples = total;
  double macro_sum = 0.0;
  double weighted_sum = 0.0;
  size_t supported = 0;
  size_t support_total = 0;
  for (size_t c = 0; c < classes; ++c) {
    const size_t tp = matrix.counts[c][c];
    size_t gold = 0;
    size_t predicted = 0;
    for (size_t j = 0; j < classes; ++j) {
      gold += matrix.counts[c][j];
      predicted += matrix.counts[j][c];
    }
    ClassScores s;
    s.label = matrix.class_order[c];
    s.support = gold;
    s.precision = ratio(tp, predicted);
    s.recall = ratio(tp, gold);
    // 2PR/(P+R) == 2TP/(2TP+FP+FN); the count form is exact for integers.
    s.f1 = ratio(2 * tp, gold + predicted);
    if (gold > 0) {
      macro_sum += s.f1;
      weighted_sum += s.f1 * static_cast<double>(gold);
      ++supported;
      support_total += gold;
    }
    report.per_class.push_back(std::move(s));
  }
  report.macro_f1 = supported ? macro_sum / static_cast<double>(supported) : 0.0;
  report.weighted_f1 =
      support_total ? weighted_sum / static_cast<double>(support_total) : 0.0;
  return report;
}

EvalReport dialect_breakdown(
    const Corpus& gold,
    const std::unordered_map<std::string, Label>& predictions,
    std::span<const Label> class_order) {
  if (gold.empty()) throw InvalidArgument("dialect_breakdown: empty corpus");
  std::vector<Label> gold_labels;
  std::vector<Label> pred_labels;
  for (const Review& r : gold.reviews()) {
    if (!r.sentiment) {
      throw InvalidArgument("dialect_breakdown: review '" + r.id +
                            "' has no gold sentiment");
    }
    auto it = predictions.find(r.id);
    if (it == predictions.end()) {
      throw InvalidArgument("dialect_breakdown: no prediction for review '" +
                            r.id + "'");
    }
    gold_labels.push_back(*r.sentiment);
    pred_labels.push_back(it->second);
  }

  std::vector<Label> order(class_order.begin(), class_order.end());
  if (order.empty()) {
    order = gold.label_set();
    for (const Label& p : pred_labels) {
      if (std::find(order.begin(), order.end(), p) == order.end()) {
        order.push_back(p);
      }
    }
  }

  EvalReport report =
      f1_report(confusion_matrix(gold_labels, pred_labels, order));
  for (const std::string& dialect : gold.dialect_set()) {
    std::vector<Label> g;
    std::vector<Label> p;
    for (size_t k = 0; k < gold.size(); ++k) {
      if (gold[k].dialect == dialect) {
        g.push_back(gold_labels[k]);
        p.push_back(pred_labels[k]);
      }
    }
    report.per_dialect.emplace_back(dialect,
                                    f1_report(confusion_matrix(g, p, order)));
  }
  return report;
}

std::string format_hms(double seconds) {
  const long long total = std::llround(std::max(0.0, seconds));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", total / 3600,
                (total / 60) % 60, total % 60);
  return buf;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const ClassScores& s : report.per_class) {
    per_class.push_back({{"label", s.label},
                         {"precision", s.precision},
                         {"recall", s.recall},
                         {"f1", s.f1},
                         {"support", s.support}});
  }
  nlohmann::json per_dialect = nlohmann::json::object();
  for (const auto& [dialect, child] : report.per_dialect) {
    per_dialect[dialect] = report_to_json(child);
  }
  return {{"per_class", per_class},
          {"macro_f1", report.macro_f1},
          {"weighted_f1", report.weighted_f1},
          {"per_dialect", per_dialect},
          {"n_examples", report.n_examples},
          {"duration_seconds", report.duration_seconds},
          {"class_order", report.confusion.class_order},
          {"confusion", report.confusion.counts}};
}

void print_dialect_table(std::ostream& out, const EvalReport& report) {
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << "Dialect | Class | F1 %\n---|---|---\n";
  out << std::fixed << std::setprecision(2);
  for (const auto& [dialect, child] : report.per_dialect) {
    for (const ClassScores& s : child.per_class) {
      out << dialect << " | " << s.label << " | " << s.f1 * 100.0 << '\n';
    }
  }
  out << "\nmacro F1 " << report.macro_f1 * 100.0 << " %, weighted F1 "
      << report.weighted_f1 * 100.0 << " %, " << report.n_examples
      << " examples, " << format_hms(report.duration_seconds) << '\n';
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace fewshot
