#pragma once

#include <string>

#include "dage/evaluation.hpp"
#include "dage/templates.hpp"

namespace dage {

// Sections: `type,mrr,count`, `bucket,mrr,count`, then one header row
// 2s,3s,sp,is,us,Avg_nn,ins,Avg and one value row. Missing types are empty
// cells. Without negation support ins and Avg stay empty.
std::string report_tables(const MrrReport& report, bool supports_negation);

// Columns of the value row, in order.
const std::vector<std::string>& table_columns();

std::string overlap_histogram_csv(const DatasetSplit& split);

}  // namespace dage
