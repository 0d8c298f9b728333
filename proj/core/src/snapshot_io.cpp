#include "econoscale/snapshot_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "econoscale/error.hpp"
#include "econoscale/text.hpp"

namespace econoscale::kwem {

void write_snapshot_csv(std::ostream& out, const PopulationSnapshot& snap) {
  out << "# trade_count: " << snap.trade_count << '\n';
  out << "index,wealth,lambda\n";
  for (std::size_t i = 0; i < snap.wealths.size(); ++i) {
    const double lambda = i < snap.savings.size() ? snap.savings[i] : 0.0;
    out << i << ',' << format_number(snap.wealths[i]) << ',' << format_number(lambda) << '\n';
  }
}

void write_snapshot_csv(const std::filesystem::path& path, const PopulationSnapshot& snap) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  write_snapshot_csv(out, snap);
}

PopulationSnapshot read_snapshot_csv(std::istream& in, const std::string& source_name) {
  PopulationSnapshot snap;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  const auto bad = [&](const std::string& what) {
    fail(ErrorCode::parse_error, source_name + ": line " + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      constexpr std::string_view key = "# trade_count:";
      if (text.substr(0, key.size()) == key) {
        const auto v = parse_number(text.substr(key.size()));
        if (!v || *v < 0) bad("invalid trade_count comment");
        snap.trade_count = static_cast<std::uint64_t>(*v);
      }
      continue;
    }
    const auto fields = split_fields(text);
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "index" || fields[1] != "wealth") {
        bad("expected header 'index,wealth,lambda'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() < 2) bad("expected at least 2 fields");
    const auto wealth = parse_number(fields[1]);
    if (!wealth || *wealth < 0.0) bad("wealth must be a non-negative number");
    double lambda = 0.0;
    if (fields.size() >= 3) {
      const auto l = parse_number(fields[2]);
      if (!l) bad("lambda is not a number");
      lambda = *l;
    }
    snap.wealths.push_back(*wealth);
    snap.savings.push_back(lambda);
  }
  if (!header_seen) fail(ErrorCode::parse_error, source_name + ": missing header");
  return snap;
}

PopulationSnapshot read_snapshot_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  return read_snapshot_csv(in, path.string());
}

}  // namespace econoscale::kwem
