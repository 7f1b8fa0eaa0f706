#ifndef GIBBSDIM_TABLE_IO_HPP
#define GIBBSDIM_TABLE_IO_HPP

#include <string>
#include <vector>

#include "gibbsdim/partition.hpp"

namespace gibbsdim::detail {

// Loader for "n,value" tables with an optional tail=<family>:<param>
// footer; shared by the partition and measure table formats. Errors are
// reported with file:line positions.
void load_value_table(const std::string& path, std::vector<double>* values,
                      TableTail* tail);

}  // namespace gibbsdim::detail

#endif
