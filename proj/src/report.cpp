#include "dage/report.hpp"

#include <cstdio>

namespace dage {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols = {"2s", "3s", "sp", "is", "us", "Avg_nn", "ins", "Avg"};
  return cols;
}

std::string report_tables(const MrrReport& report, bool supports_negation) {
  std::string out = "type,mrr,count\n";
  for (const auto& type : benchmark_tags()) {
    auto it = report.by_type.find(type);
    if (it == report.by_type.end()) continue;
    out += type + "," + fmt(it->second.mrr) + "," + std::to_string(it->second.count) + "\n";
  }
  out += "\nbucket,mrr,count\n";
  for (std::size_t k = 0; k < 4; ++k) {
    const MrrCell& c = report.by_bucket[k];
    out += bucket_labels()[k] + "," + (c.count ? fmt(c.mrr) : std::string()) + "," + std::to_string(c.count) + "\n";
  }
  out += "\n";
  const auto& cols = table_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ",";
    const std::string& c = cols[i];
    if (c == "Avg_nn") {
      if (report.has_avg_nn) out += fmt(report.avg_nn);
    } else if (c == "Avg") {
      if (supports_negation && report.has_avg) out += fmt(report.avg);
    } else if (c == "ins" && !supports_negation) {
    } else if (auto it = report.by_type.find(c); it != report.by_type.end()) {
      out += fmt(it->second.mrr);
    }
  }
  out += "\n";
  return out;
}

std::string overlap_histogram_csv(const DatasetSplit& split) {
  const auto counts = overlap_histogram(split);
  std::string out = "bucket,count\n";
  for (std::size_t k = 0; k < 4; ++k) out += bucket_labels()[k] + "," + std::to_string(counts[k]) + "\n";
  return out;
}

}  // namespace dage
