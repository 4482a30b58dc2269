#ifndef FEWSHOT_METRICS_H_
#define FEWSHOT_METRICS_H_

#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fewshot/corpus.h"

namespace fewshot {

// Rows are gold classes, columns predicted classes.
struct ConfusionMatrix {
  std::vector<Label> class_order;
  std::vector<std::vector<size_t>> counts;

  size_t total() const;
};

ConfusionMatrix confusion_matrix(std::span<const Label> gold,
                                 std::span<const Label> pred,
                                 std::span<const Label> class_order);

struct ClassScores {
  Label label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t support = 0;
};

struct EvalReport {
  std::vector<ClassScores> per_class;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  size_t n_examples = 0;
  double duration_seconds = 0.0;
  ConfusionMatrix confusion;
  // Dialect tag -> report over that subset, in corpus dialect order.
  std::vector<std::pair<std::string, EvalReport>> per_dialect;

  const ClassScores& scores(const Label& label) const;
};

// Undefined ratios count as 0. Macro and weighted F1 average over classes
// with nonzero gold support only. Throws InvalidArgument on an empty matrix.
EvalReport f1_report(const ConfusionMatrix& matrix);

// Parent report over all of `gold`, plus one child per dialect. Throws
// InvalidArgument naming a review without a prediction or without a gold
// label. When class_order is empty it is the corpus label_set extended by
// any further predicted labels.
EvalReport dialect_breakdown(
    const Corpus& gold,
    const std::unordered_map<std::string, Label>& predictions,
    std::span<const Label> class_order = {});

// "hh:mm:ss", hours unbounded.
std::string format_hms(double seconds);

nlohmann::json report_to_json(const EvalReport& report);

// Dialect x class F1 table.
void print_dialect_table(std::ostream& out, const EvalReport& report);

}  // namespace fewshot

#endif  // FEWSHOT_METRICS_H_
