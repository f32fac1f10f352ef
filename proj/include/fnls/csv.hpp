#pragma once

#include <string>
#include <vector>

namespace fnls {

// 12 significant digits
std::string csv_num(double v);
std::string csv_line(const std::vector<std::string>& cells);

}  // namespace fnls
