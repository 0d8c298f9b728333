#pragma once

#include <filesystem>
#include <iosfwd>

#include "econoscale/kwem.hpp"

namespace econoscale::kwem {

// Snapshot CSV: an optional `# trade_count: <n>` comment, the header line
// `index,wealth,lambda`, then one row per agent in index order.

void write_snapshot_csv(std::ostream& out, const PopulationSnapshot& snap);
void write_snapshot_csv(const std::filesystem::path& path, const PopulationSnapshot& snap);

PopulationSnapshot read_snapshot_csv(std::istream& in, const std::string& source_name);
PopulationSnapshot read_snapshot_csv(const std::filesystem::path& path);

}  // namespace econoscale::kwem
