#pragma once

#include <iosfwd>
#include <string>

#include "adaptrt/data.hpp"

namespace adaptrt {

// Dataset CSV: header "t,context,action,response"; context is a
// semicolon-joined real vector, an integer state, or empty; MDP files carry
// one extra trailing-action row (t = T+1, response empty).
void write_dataset_csv(const Dataset& d, std::ostream& os);
void write_dataset_csv_file(const Dataset& d, const std::string& path);

Dataset read_dataset_csv(std::istream& is);
Dataset read_dataset_csv_file(const std::string& path);

}  // namespace adaptrt
