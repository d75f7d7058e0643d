#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "zsmat/metrics.hpp"

namespace zsmat {

/// Named evaluation rows; the combined row is appended by the writers.
using EvalRows = std::vector<std::pair<std::string, SequenceEval>>;

/// Fixed-width table with the columns HOTA DetA AssA DetRe LocA MOTA IDF1 IDSW
/// plus a pooled COMBINED row.
std::string eval_table_text(const EvalRows& rows);
/// {"columns":[...],"sequences":{name:{...}},"combined":{...}}
std::string eval_to_json(const EvalRows& rows);

struct MetricRow {
  double hota = 0, deta = 0, assa = 0, detre = 0, loca = 0, mota = 0, idf1 = 0;
  long idsw = 0;
};
/// Reads the "combined" row of an eval_to_json document.
MetricRow combined_from_eval_json(const std::string& text, const std::string& source);

struct ReportTables {
  std::string histograms_csv;  // variant,sequence,bin_lo,bin_hi,count,cluster,tau
  std::string thresholds_csv;  // variant,sequence,mode,tau,mu1,mu2,n1,n2
  std::string ablation_csv;    // variant,HOTA,...,IDSW,event counts
};

/// Each directory is one variant (named after the directory). It must hold
/// `<seq>.threshold.json` and `<seq>.events.jsonl` for at least one sequence
/// and an `eval.json`. Throws ValidationError listing every absent file.
ReportTables build_report(const std::vector<std::string>& result_dirs);

}  // namespace zsmat
