#pragma once

#include <string>
#include <vector>

#include "catejudge/types.hpp"

namespace catejudge {

// Dataset wire format: header `x1,...,xd,w,y`, one unit per line, plain
// decimal floats, no quoting. Parse failures raise config_error naming the
// 1-based data row and the column.
TestDataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const TestDataset& data);

// Single-column CSV of reals; an optional non-numeric first line is treated
// as a header. `header` names the column on write.
std::vector<double> read_column_csv(const std::string& path);
void write_column_csv(const std::string& path, const std::vector<double>& values,
                      const std::string& header);

}  // namespace catejudge
